#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace evrender {

/// Fixed-size pool that runs index-range jobs. Work is handed out in
/// chunks from a shared counter; callers must not depend on which worker
/// runs which index.
class WorkerPool {
public:
    explicit WorkerPool(unsigned threads);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

    /// Calls body(i, worker) for every i in [0, count), blocking until all
    /// calls return. `worker` is in [0, size()). The first exception thrown
    /// by any call is rethrown here.
    void parallel_for(std::size_t count, const std::function<void(std::size_t, unsigned)>& body,
                      std::size_t chunk = 1);

private:
    void worker_loop(unsigned id);
    void run_chunks(unsigned id);

    std::vector<std::jthread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    std::uint64_t generation_ = 0;
    bool stopping_ = false;
    unsigned active_ = 0;

    const std::function<void(std::size_t, unsigned)>* body_ = nullptr;
    std::size_t count_ = 0;
    std::size_t chunk_ = 1;
    std::size_t next_ = 0;
    std::exception_ptr error_;
};

/// Worker count from an explicit request, else EVRENDER_THREADS, else the
/// hardware concurrency.
unsigned resolve_thread_count(unsigned requested);

}  // namespace evrender
