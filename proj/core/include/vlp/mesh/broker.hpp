#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "vlp/mesh/wire.hpp"

namespace vlp::mesh {

// In-process message hub: topics with bounded newest-wins queues and
// request/reply services, each service running on its own worker thread so
// call timeouts are real. Publishers and subscribers share nothing but this
// object; messages are immutable after publish.
class Broker {
public:
    Broker() = default;
    ~Broker();
    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

    struct TopicStats {
        std::uint64_t published = 0;
        std::uint64_t delivered = 0;
        std::uint64_t dropped = 0;
    };

    class Subscription {
    public:
        // Blocks up to timeout_ms; nullopt on timeout or closed-and-empty.
        std::optional<WireFrame> pop(int timeout_ms);
        std::uint32_t consumed_seq() const { return consumed_seq_.load(); }
        std::size_t pending() const;

    private:
        friend class Broker;
        explicit Subscription(std::size_t depth) : depth_(depth) {}

        mutable std::mutex mu_;
        std::condition_variable cv_;
        std::deque<WireFrame> queue_;
        std::size_t depth_;
        std::atomic<std::uint32_t> consumed_seq_{0};
        std::uint64_t dropped_ = 0;
        bool closed_ = false;
    };

    void register_topic(const std::string& name, std::size_t queue_depth);
    bool has_topic(const std::string& name) const;

    // Fan-out to every subscriber; per-subscriber overflow drops the oldest
    // queued message (counted, not an error).
    void publish(const std::string& topic, WireFrame msg);

    std::shared_ptr<Subscription> subscribe(const std::string& topic);

    // Blocks until some subscriber of the topic consumed seq >= target.
    // Flow-control hook for paced-off camera runs.
    bool wait_consumed(const std::string& topic, std::uint32_t target_seq, int timeout_ms);

    TopicStats topic_stats(const std::string& topic) const;

    using ServiceHandler =
        std::function<std::vector<std::uint8_t>(const std::vector<std::uint8_t>&)>;

    void register_service(const std::string& name, ServiceHandler handler);
    bool has_service(const std::string& name) const;

    // Synchronous request/reply. Throws TimeoutError / TransportError.
    std::vector<std::uint8_t> call_service(const std::string& name,
                                           const std::vector<std::uint8_t>& request,
                                           int timeout_ms);

    void shutdown();

private:
    struct Topic {
        std::size_t depth = 1;
        std::vector<std::shared_ptr<Subscription>> subs;
        TopicStats stats;
        std::condition_variable consumed_cv;
    };

    struct PendingCall {
        std::vector<std::uint8_t> request;
        std::vector<std::uint8_t> response;
        std::string error;
        bool done = false;
        std::condition_variable cv;
        std::mutex mu;
    };

    struct Service {
        ServiceHandler handler;
        std::thread worker;
        std::mutex mu;
        std::condition_variable cv;
        std::deque<std::shared_ptr<PendingCall>> queue;
        bool stop = false;
    };

    mutable std::mutex mu_;
    std::unordered_map<std::string, Topic> topics_;
    std::unordered_map<std::string, std::unique_ptr<Service>> services_;
    std::atomic<std::uint32_t> next_request_id_{1};
    bool shut_ = false;
};

} // namespace vlp::mesh
