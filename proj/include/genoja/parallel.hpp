#pragma once

namespace genoja {

/// Number of OpenMP threads to use: min(omp_get_max_threads(),
/// GENOJA_THREADS) when the env var is set to a positive integer.
int thread_cap();

}  // namespace genoja
