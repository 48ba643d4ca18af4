#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace streamrec {

// Minimal persistent pool for parallel_for over an index range. The calling
// thread participates, so `threads` is the total budget. Tasks must write to
// disjoint state; the pool adds no ordering of its own.
class ThreadPool {
public:
    explicit ThreadPool(unsigned threads) {
        const unsigned extra = threads > 1 ? threads - 1 : 0;
        workers_.reserve(extra);
        for (unsigned t = 0; t < extra; ++t)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~ThreadPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    unsigned size() const noexcept {
        return static_cast<unsigned>(workers_.size()) + 1;
    }

    // Runs fn(i) for every i in [0, count); returns once all calls finished.
    void parallel_for(std::size_t count,
                      const std::function<void(std::size_t)>& fn) {
        if (count == 0) return;
        if (workers_.empty() || count == 1) {
            for (std::size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        {
            std::lock_guard lock(mutex_);
            job_ = &fn;
            next_.store(0, std::memory_order_relaxed);
            end_ = count;
            active_ = workers_.size();
            ++generation_;
        }
        cv_.notify_all();
        run_indices(fn);
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [this] { return active_ == 0; });
        job_ = nullptr;
    }

private:
    void run_indices(const std::function<void(std::size_t)>& fn) {
        while (true) {
            const std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
            if (i >= end_) break;
            fn(i);
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        while (true) {
            const std::function<void(std::size_t)>* job = nullptr;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                job = job_;
            }
            if (job) run_indices(*job);
            {
                std::lock_guard lock(mutex_);
                if (--active_ == 0) done_cv_.notify_one();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::atomic<std::size_t> next_{0};
    std::size_t end_ = 0;
    std::size_t active_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace streamrec
