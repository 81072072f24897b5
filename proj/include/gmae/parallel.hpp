// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace gmae {

// Number of worker threads.  Defaults to hardware_concurrency, overridable
// with the GMAE_THREADS environment variable (clamped to [1, 256]).
int thread_count();

// Runs fn(chunk_begin, chunk_end) over [0, n) split into fixed-size chunks.
// The chunk boundaries depend only on n and chunk_size, never on the thread
// count, so any floating-point reduction performed per chunk and then merged
// in chunk order yields bit-identical results for 1 or N threads.
void parallel_chunks(long n, long chunk_size,
                     const std::function<void(long, long)>& fn);

}  // namespace gmae
