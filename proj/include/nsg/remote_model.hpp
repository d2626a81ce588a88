#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include <spdlog/logger.h>

#include "nsg/llm_gateway.hpp"

namespace nsg {

struct RemoteSettings {
  /// Full URL of the chat-completion route, e.g. "https://host/v1/chat/completions".
  std::string endpoint;
  std::string model;
  std::string api_key;
  std::size_t max_concurrency = 4;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_max{8000};
};

/// Delay before retry number `retry` (0-based): min(max, base * 2^retry).
std::chrono::milliseconds backoff_delay(const RemoteSettings& settings, int retry);

/// Chat-completion client. Connection failures, timeouts, 408, 429 and 5xx
/// are retried up to params.retries times; any other non-2xx status raises
/// RemoteError at once.
class RemoteLanguageModel final : public LanguageModel {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  /// Throws ConfigError on a malformed endpoint or a zero concurrency cap.
  /// A null logger falls back to spdlog's default logger; an empty sleeper
  /// really sleeps.
  explicit RemoteLanguageModel(RemoteSettings settings, std::shared_ptr<spdlog::logger> logger = nullptr,
                               Sleeper sleeper = {});

  std::string complete(std::string_view prompt, const GenerationParams& params) override;
  PatternOrigin pattern_origin() const override { return PatternOrigin::llm; }

  /// Highest number of simultaneous in-flight requests seen so far.
  std::size_t peak_in_flight() const;

 private:
  class Slot;

  RemoteSettings settings_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::shared_ptr<spdlog::logger> logger_;
  Sleeper sleeper_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
};

/// Replaces every occurrence of `secret` in `text` with "[REDACTED]".
std::string redact(std::string text, const std::string& secret);

}  // namespace nsg
