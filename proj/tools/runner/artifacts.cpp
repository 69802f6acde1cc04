#include "artifacts.hpp"

#include "pinv/errors.hpp"

#include <algorithm>
#include <fstream>

namespace pinv::cli {

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    thread_ = std::thread([this] { loop(); });
}

ArtifactWriter::~ArtifactWriter() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void ArtifactWriter::write(const std::string& name, std::string content) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        queue_.push_back({name, std::move(content), false});
        if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
    }
    cv_.notify_one();
}

void ArtifactWriter::append(const std::string& name, std::string content) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        queue_.push_back({name, std::move(content), true});
    }
    cv_.notify_one();
}

void ArtifactWriter::flush() {
    std::unique_lock<std::mutex> lock(mu_);
    idle_.wait(lock, [this] { return queue_.empty() && !busy_; });
    if (error_) {
        auto e = error_;
        error_ = nullptr;
        std::rethrow_exception(e);
    }
}

std::vector<std::string> ArtifactWriter::written() const {
    std::lock_guard<std::mutex> lock(mu_);
    return names_;
}

void ArtifactWriter::loop() {
    for (;;) {
        Job job;
        {
            std::unique_lock<std::mutex> lock(mu_);
            cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
            if (queue_.empty()) return;
            job = std::move(queue_.front());
            queue_.pop_front();
            busy_ = true;
        }
        try {
            const auto target = dir_ / job.name;
            if (job.append) {
                std::ofstream out(target, std::ios::binary | std::ios::app);
                if (!out) throw ConfigError("cannot write '" + target.string() + "'");
                out << job.content;
            } else {
                const auto tmp = dir_ / (job.name + ".tmp");
                {
                    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
                    out << job.content;
                    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
                }
                std::filesystem::rename(tmp, target);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu_);
            if (!error_) error_ = std::current_exception();
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            busy_ = false;
        }
        idle_.notify_all();
    }
}

}  // namespace pinv::cli
