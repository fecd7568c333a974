#pragma once

#include <cstdint>
#include <string>

namespace bihyper {

// Shortest round-trip decimal form, stable across runs ("%.17g" trimmed).
std::string formatDouble(double x);

// FNV-1a over a byte string; used for config hashes / run ids.
uint64_t fnv1a(const std::string& bytes);

// Worker-thread cap: BIHYPER_THREADS when set, else hardware concurrency.
int workerThreadCap();

}  // namespace bihyper
