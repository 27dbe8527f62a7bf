#include "colonmap/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace colonmap {

int thread_budget() {
    if (const char *env = std::getenv("COLONMAP_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1)
            return n;
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, const std::function<void(int)> &fn) {
    if (count <= 0)
        return;
    const int workers = std::min(thread_budget(), count);
    if (workers == 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    const int chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end)
            break;
        pool.emplace_back([begin, end, &fn] {
            for (int i = begin; i < end; ++i)
                fn(i);
        });
    }
    for (auto &t : pool)
        t.join();
}

} // namespace colonmap
