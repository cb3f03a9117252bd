#include "evrender/workers.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>

namespace evrender {

WorkerPool::WorkerPool(unsigned threads) {
    const unsigned extra = threads > 1 ? threads - 1 : 0;
    workers_.reserve(extra);
    for (unsigned i = 0; i < extra; ++i) {
        workers_.emplace_back([this, id = i + 1] { worker_loop(id); });
    }
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
}

void WorkerPool::run_chunks(unsigned id) {
    for (;;) {
        std::size_t begin;
        {
            std::lock_guard lock(mutex_);
            if (next_ >= count_ || error_) return;
            begin = next_;
            next_ = std::min(count_, next_ + chunk_);
        }
        const std::size_t end = std::min(count_, begin + chunk_);
        try {
            for (std::size_t i = begin; i < end; ++i) (*body_)(i, id);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
            return;
        }
    }
}

void WorkerPool::worker_loop(unsigned id) {
    std::uint64_t seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) return;
            seen = generation_;
            ++active_;
        }
        run_chunks(id);
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        done_.notify_all();
    }
}

void WorkerPool::parallel_for(std::size_t count, const std::function<void(std::size_t, unsigned)>& body,
                              std::size_t chunk) {
    if (count == 0) return;
    {
        std::lock_guard lock(mutex_);
        body_ = &body;
        count_ = count;
        chunk_ = std::max<std::size_t>(1, chunk);
        next_ = 0;
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();
    run_chunks(0);
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return active_ == 0 && (next_ >= count_ || error_); });
        error = error_;
        body_ = nullptr;
        count_ = 0;
    }
    if (error) std::rethrow_exception(error);
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("EVRENDER_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace evrender
