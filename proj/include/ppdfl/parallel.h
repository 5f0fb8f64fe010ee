/*
 * Copyright 2026 The ppdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PPDFL_PARALLEL_H_
#define PPDFL_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace ppdfl {

// Worker count: PPDFL_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t ThreadBudget();

// Runs fn(0..count-1) over up to ThreadBudget() threads in contiguous
// blocks and joins before returning. The first exception thrown by any
// worker is rethrown on the caller. Callers must keep per-index work
// independent; results then do not depend on the thread count.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& fn,
                 std::size_t min_block = 1);

}  // namespace ppdfl

#endif  // PPDFL_PARALLEL_H_
