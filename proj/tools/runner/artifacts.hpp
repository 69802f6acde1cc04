#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace pinv::cli {

/// Single background thread that owns every file write of a run.
/// Each artifact is written to a temporary name and renamed into place, so readers never see partial files.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);
    ~ArtifactWriter();
    ArtifactWriter(const ArtifactWriter&) = delete;
    ArtifactWriter& operator=(const ArtifactWriter&) = delete;

    void write(const std::string& name, std::string content);
    void append(const std::string& name, std::string content);
    /// Wait for the queue to drain; rethrows the first write failure.
    void flush();
    const std::filesystem::path& dir() const { return dir_; }
    std::vector<std::string> written() const;

private:
    struct Job {
        std::string name;
        std::string content;
        bool append = false;
    };
    void loop();

    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable idle_;
    std::deque<Job> queue_;
    std::vector<std::string> names_;
    bool busy_ = false;
    bool stop_ = false;
    std::exception_ptr error_;
    std::thread thread_;
};

/// Evaluate fn(i) for i in [0, n) on up to `workers` threads; results keep index order.
template <class F>
auto parallel_map(int workers, std::size_t n, F fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(n);
    const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace pinv::cli
