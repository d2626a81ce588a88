#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

// Local chat-completion endpoint with a scripted sequence of statuses. Once
// the script runs out, the last entry repeats.
class StubServer {
 public:
  struct Step {
    int status = 200;
    std::string content = "ok";
    std::chrono::milliseconds delay{0};
  };

  explicit StubServer(std::vector<Step> script) : script_(std::move(script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      Step step;
      {
        std::lock_guard lock(mu_);
        const std::size_t i = hits_++;
        step = script_.empty() ? Step{} : script_[std::min(i, script_.size() - 1)];
        auth_headers_.push_back(req.get_header_value("Authorization"));
        bodies_.push_back(req.body);
      }
      const int now = ++in_flight_;
      int seen = peak_.load();
      while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
      }
      if (step.delay.count() > 0) std::this_thread::sleep_for(step.delay);
      --in_flight_;
      res.status = step.status;
      if (step.status == 200) {
        const nlohmann::json reply{{"choices", nlohmann::json::array({{{"message", {{"content", step.content}}}}})}};
        res.set_content(reply.dump(), "application/json");
      } else {
        res.set_content("{\"error\":\"scripted failure\"}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  std::size_t hits() const {
    std::lock_guard lock(mu_);
    return hits_;
  }
  std::vector<std::string> auth_headers() const {
    std::lock_guard lock(mu_);
    return auth_headers_;
  }
  std::vector<std::string> bodies() const {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  int peak_in_flight() const { return peak_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::vector<Step> script_;
  mutable std::mutex mu_;
  std::size_t hits_ = 0;
  std::vector<std::string> auth_headers_;
  std::vector<std::string> bodies_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};
