#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace toeplab::harness {

/// Worker count from TOEPLAB_WORKERS, else hardware concurrency (>= 1).
inline int default_workers()
{
    if (char const* env = std::getenv("TOEPLAB_WORKERS"))
    {
        try
        {
            int w = std::stoi(env);
            if (w >= 1)
                return w;
        }
        catch (std::exception const&)
        {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Run fn(i) for i in [0, count) on `workers` threads. Tasks are claimed from
/// a shared counter; callers write results into slot i, so the outcome does
/// not depend on scheduling. The exception of the lowest failing task is
/// rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn)
{
    workers = std::max(1, workers);
    if (workers == 1 || count <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::exception_ptr> errors(count);
    auto body = [&] {
        for (;;)
        {
            if (failed.load(std::memory_order_relaxed))
                return;
            std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::size_t const nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t)
        pool.emplace_back(body);
    for (auto& th : pool)
        th.join();
    for (auto const& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace toeplab::harness
