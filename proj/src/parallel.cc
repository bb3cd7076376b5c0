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

#include "blime/parallel.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "blime/error.h"

namespace blime {

namespace {
std::atomic<bool> g_cancelled{false};
}  // namespace

void RequestCancellation() { g_cancelled.store(true); }
bool CancellationRequested() { return g_cancelled.load(); }
void ResetCancellation() { g_cancelled.store(false); }

void ParallelFor(int count, int workers, const std::function<void(int)>& body) {
  if (count <= 0) return;
  workers = std::clamp(workers, 1, count);

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto run = [&] {
    while (!failed.load()) {
      if (CancellationRequested()) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::make_exception_ptr(Cancelled());
        failed.store(true);
        return;
      }
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int t = 0; t < workers; ++t) threads.emplace_back(run);
    for (std::thread& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace blime
