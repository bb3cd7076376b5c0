/*
 * Copyright 2026 The BLIME Authors.
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

#ifndef BLIME_PARALLEL_H_
#define BLIME_PARALLEL_H_

#include <functional>

namespace blime {

// Runs body(i) for i in [0, count) on up to `workers` threads. The first
// exception thrown by any body is rethrown after all threads join; remaining
// items are skipped once a failure or a cancellation request is observed.
void ParallelFor(int count, int workers, const std::function<void(int)>& body);

// Process-wide cancellation flag, polled by ParallelFor between items.
void RequestCancellation();
bool CancellationRequested();
void ResetCancellation();

}  // namespace blime

#endif  // BLIME_PARALLEL_H_
