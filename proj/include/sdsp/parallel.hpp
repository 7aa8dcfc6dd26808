#pragma once

namespace sdsp {

/// Number of OpenMP workers used by parallel kernels and batch commands:
/// the OpenMP default, capped by the SDSP_THREADS environment variable or by
/// set_worker_limit(). Always >= 1.
int worker_count();

/// Overrides the cap (0 restores the environment/default behaviour).
void set_worker_limit(int limit);

}  // namespace sdsp
