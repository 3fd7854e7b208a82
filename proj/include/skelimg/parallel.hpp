#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace skelimg {

inline unsigned resolve_threads(unsigned requested) noexcept
{
   if(requested > 0) return requested;
   return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = all cores).
// fn must only write to per-index slots; results are then independent of
// the schedule. The exception of the lowest failing index is rethrown.
template<typename Fn> void parallel_for(size_t n, unsigned threads, Fn&& fn)
{
   const size_t workers = std::min<size_t>(resolve_threads(threads), n);
   std::vector<std::exception_ptr> errors(n);
   const auto run = [&](size_t w) {
      for(size_t i = w; i < n; i += workers) {
         try {
            fn(i);
         } catch(...) {
            errors[i] = std::current_exception();
         }
      }
   };
   if(workers <= 1) {
      run(0);
   } else {
      std::vector<std::jthread> pool;
      for(size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
   }
   for(auto& e : errors)
      if(e) std::rethrow_exception(e);
}

} // namespace skelimg
