#include "vlp/mesh/broker.hpp"

#include <chrono>

namespace vlp::mesh {

using namespace std::chrono;

std::optional<WireFrame> Broker::Subscription::pop(int timeout_ms) {
    std::unique_lock lk(mu_);
    if (!cv_.wait_for(lk, milliseconds(timeout_ms),
                      [&] { return !queue_.empty() || closed_; }))
        return std::nullopt;
    if (queue_.empty()) return std::nullopt;
    WireFrame f = std::move(queue_.front());
    queue_.pop_front();
    consumed_seq_.store(f.seq);
    return f;
}

std::size_t Broker::Subscription::pending() const {
    std::lock_guard lk(mu_);
    return queue_.size();
}

Broker::~Broker() { shutdown(); }

void Broker::register_topic(const std::string& name, std::size_t queue_depth) {
    std::lock_guard lk(mu_);
    auto& t = topics_[name];
    t.depth = queue_depth == 0 ? 1 : queue_depth;
}

bool Broker::has_topic(const std::string& name) const {
    std::lock_guard lk(mu_);
    return topics_.count(name) > 0;
}

void Broker::publish(const std::string& topic, WireFrame msg) {
    std::unique_lock lk(mu_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) throw TransportError("publish to unregistered topic: " + topic);
    Topic& t = it->second;
    t.stats.published++;
    for (auto& sub : t.subs) {
        std::lock_guard slk(sub->mu_);
        if (sub->queue_.size() >= sub->depth_) {
            sub->queue_.pop_front();  // newest wins
            sub->dropped_++;
            t.stats.dropped++;
        }
        sub->queue_.push_back(msg);
        t.stats.delivered++;
        sub->cv_.notify_one();
    }
}

std::shared_ptr<Broker::Subscription> Broker::subscribe(const std::string& topic) {
    std::lock_guard lk(mu_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) throw TransportError("subscribe to unregistered topic: " + topic);
    auto sub = std::shared_ptr<Subscription>(new Subscription(it->second.depth));
    it->second.subs.push_back(sub);
    return sub;
}

bool Broker::wait_consumed(const std::string& topic, std::uint32_t target_seq, int timeout_ms) {
    auto deadline = steady_clock::now() + milliseconds(timeout_ms);
    for (;;) {
        {
            std::lock_guard lk(mu_);
            auto it = topics_.find(topic);
            if (it == topics_.end()) return false;
            for (auto& sub : it->second.subs)
                if (sub->consumed_seq() >= target_seq) return true;
        }
        if (steady_clock::now() >= deadline) return false;
        std::this_thread::sleep_for(milliseconds(1));
    }
}

Broker::TopicStats Broker::topic_stats(const std::string& topic) const {
    std::lock_guard lk(mu_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) return {};
    return it->second.stats;
}

void Broker::register_service(const std::string& name, ServiceHandler handler) {
    std::lock_guard lk(mu_);
    if (services_.count(name)) throw TransportError("service already registered: " + name);
    auto svc = std::make_unique<Service>();
    svc->handler = std::move(handler);
    Service* raw = svc.get();
    svc->worker = std::thread([raw] {
        for (;;) {
            std::shared_ptr<PendingCall> call;
            {
                std::unique_lock lk(raw->mu);
                raw->cv.wait(lk, [&] { return raw->stop || !raw->queue.empty(); });
                if (raw->stop && raw->queue.empty()) return;
                call = raw->queue.front();
                raw->queue.pop_front();
            }
            std::vector<std::uint8_t> resp;
            std::string err;
            try {
                resp = raw->handler(call->request);
            } catch (const std::exception& e) {
                err = e.what();
            }
            {
                std::lock_guard lk(call->mu);
                call->response = std::move(resp);
                call->error = std::move(err);
                call->done = true;
            }
            call->cv.notify_all();
        }
    });
    services_[name] = std::move(svc);
}

bool Broker::has_service(const std::string& name) const {
    std::lock_guard lk(mu_);
    return services_.count(name) > 0;
}

std::vector<std::uint8_t> Broker::call_service(const std::string& name,
                                               const std::vector<std::uint8_t>& request,
                                               int timeout_ms) {
    Service* svc = nullptr;
    {
        std::lock_guard lk(mu_);
        auto it = services_.find(name);
        if (it == services_.end()) throw TransportError("unknown service: " + name);
        svc = it->second.get();
    }
    auto call = std::make_shared<PendingCall>();
    call->request = request;
    {
        std::lock_guard lk(svc->mu);
        svc->queue.push_back(call);
    }
    svc->cv.notify_one();

    std::unique_lock lk(call->mu);
    if (!call->cv.wait_for(lk, milliseconds(timeout_ms), [&] { return call->done; }))
        throw TimeoutError("service call timed out: " + name);
    if (!call->error.empty()) throw TransportError("service " + name + " failed: " + call->error);
    return call->response;
}

void Broker::shutdown() {
    std::unordered_map<std::string, std::unique_ptr<Service>> services;
    {
        std::lock_guard lk(mu_);
        if (shut_) return;
        shut_ = true;
        services.swap(services_);
        for (auto& [name, topic] : topics_) {
            for (auto& sub : topic.subs) {
                std::lock_guard slk(sub->mu_);
                sub->closed_ = true;
                sub->cv_.notify_all();
            }
        }
    }
    for (auto& [name, svc] : services) {
        {
            std::lock_guard lk(svc->mu);
            svc->stop = true;
        }
        svc->cv.notify_all();
        if (svc->worker.joinable()) svc->worker.join();
    }
}

} // namespace vlp::mesh
