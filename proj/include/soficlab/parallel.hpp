#pragma once

// Deterministic parallel reduction: tasks are split into contiguous chunks,
// each worker accumulates locally in index order, and locals merge in worker
// order. Combined with per-task sub-seeds this makes results independent of
// scheduling and of the job count.

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace soficlab {

template <class Acc, class PerTask, class Merge>
inline Acc parallel_reduce(std::uint64_t tasks, int jobs, Acc init, PerTask per_task,
                           Merge merge) {
  std::uint64_t workers = jobs < 1 ? 1 : static_cast<std::uint64_t>(jobs);
  if (workers > tasks) workers = tasks == 0 ? 1 : tasks;
  if (workers <= 1) {
    Acc acc = std::move(init);
    for (std::uint64_t i = 0; i < tasks; ++i) per_task(acc, i);
    return acc;
  }
  std::vector<Acc> locals(workers, init);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t lo = tasks * w / workers;
    const std::uint64_t hi = tasks * (w + 1) / workers;
    threads.emplace_back([&, lo, hi, w] {
      try {
        for (std::uint64_t i = lo; i < hi; ++i) per_task(locals[w], i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  Acc acc = std::move(locals[0]);
  for (std::uint64_t w = 1; w < workers; ++w) merge(acc, std::move(locals[w]));
  return acc;
}

}  // namespace soficlab
