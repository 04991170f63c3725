// Copyright 2026 The loca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace loca::detail {

// Runs body(i) for every i in [0, count) on up to `jobs` threads. Each index
// runs exactly once; results must go to per-index slots. If any call
// throws, on_error(i, exception) is invoked for the lowest failing index
// after all workers have joined.
template <class Body, class OnError>
void parallel_for(std::size_t count, int jobs, Body&& body, OnError&& on_error) {
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  const auto threads = static_cast<std::size_t>(std::clamp<long long>(jobs, 1, static_cast<long long>(std::max<std::size_t>(count, 1))));
  if (threads <= 1) {
    worker(next);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back([&] { worker(next); });
  }
  for (std::size_t i = 0; i < count; ++i)
    if (errors[i]) on_error(i, errors[i]);
}

template <class Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
  parallel_for(count, jobs, std::forward<Body>(body),
               [](std::size_t, const std::exception_ptr& e) { std::rethrow_exception(e); });
}

}  // namespace loca::detail
