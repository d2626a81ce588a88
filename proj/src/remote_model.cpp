#include "nsg/remote_model.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace nsg {

using nlohmann::json;

namespace {

constexpr std::size_t kExcerptBytes = 200;

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string excerpt(const std::string& body) {
  return body.size() <= kExcerptBytes ? body : body.substr(0, kExcerptBytes) + "...";
}

std::string extract_content(const std::string& body) {
  const json reply = json::parse(body, nullptr, false);
  if (reply.is_discarded()) throw RemoteError(200, "unparseable body: " + excerpt(body));
  const json* choices = reply.contains("choices") ? &reply["choices"] : nullptr;
  if (choices == nullptr || !choices->is_array() || choices->empty()) {
    throw RemoteError(200, "reply without choices: " + excerpt(body));
  }
  const json& first = choices->front();
  if (first.contains("message") && first["message"].contains("content") && first["message"]["content"].is_string()) {
    return first["message"]["content"].get<std::string>();
  }
  if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
  throw RemoteError(200, "reply without message content: " + excerpt(body));
}

}  // namespace

std::chrono::milliseconds backoff_delay(const RemoteSettings& settings, int retry) {
  auto delay = settings.backoff_base;
  for (int i = 0; i < retry && delay < settings.backoff_max; ++i) delay *= 2;
  return std::min(delay, settings.backoff_max);
}

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  static const std::string kMask = "[REDACTED]";
  for (std::size_t at = text.find(secret); at != std::string::npos; at = text.find(secret, at + kMask.size())) {
    text.replace(at, secret.size(), kMask);
  }
  return text;
}

// RAII hold on one of the max_concurrency request slots.
class RemoteLanguageModel::Slot {
 public:
  explicit Slot(RemoteLanguageModel& owner) : owner_(owner) {
    std::unique_lock lock(owner_.mu_);
    owner_.cv_.wait(lock, [&] { return owner_.in_flight_ < owner_.settings_.max_concurrency; });
    ++owner_.in_flight_;
    owner_.peak_ = std::max(owner_.peak_, owner_.in_flight_);
  }
  ~Slot() {
    {
      std::lock_guard lock(owner_.mu_);
      --owner_.in_flight_;
    }
    owner_.cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  RemoteLanguageModel& owner_;
};

RemoteLanguageModel::RemoteLanguageModel(RemoteSettings settings, std::shared_ptr<spdlog::logger> logger,
                                         Sleeper sleeper)
    : settings_(std::move(settings)), logger_(std::move(logger)), sleeper_(std::move(sleeper)) {
  if (settings_.max_concurrency == 0) throw ConfigError("llm.max_concurrency must be positive");
  const std::size_t scheme_end = settings_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("llm.endpoint must be an http(s) URL");
  const std::string scheme = settings_.endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("llm.endpoint must be an http(s) URL");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("this build has no TLS support; use an http endpoint");
#endif
  const std::size_t path_start = settings_.endpoint.find('/', scheme_end + 3);
  origin_ = settings_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : settings_.endpoint.substr(path_start);
  if (origin_.size() <= scheme_end + 3) throw ConfigError("llm.endpoint has no host");
  if (!logger_) logger_ = spdlog::default_logger();
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::size_t RemoteLanguageModel::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_;
}

std::string RemoteLanguageModel::complete(std::string_view prompt, const GenerationParams& params) {
  if (prompt.empty()) throw LlmError("empty prompt");
  params.validate();

  const json request{{"model", settings_.model},
                     {"messages", json::array({json{{"role", "user"}, {"content", std::string(prompt)}}})},
                     {"temperature", params.temperature},
                     {"max_tokens", params.max_tokens}};
  const std::string body = request.dump();

  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

  const std::size_t attempts = static_cast<std::size_t>(params.retries) + 1;
  std::size_t timeouts = 0;
  std::string last_failure;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) sleeper_(backoff_delay(settings_, static_cast<int>(attempt - 1)));

    logger_->debug("POST {}{} attempt {}/{} auth=Bearer {} body={}", origin_, path_, attempt + 1, attempts,
                   settings_.api_key.empty() ? "(none)" : "[REDACTED]", redact(body, settings_.api_key));

    httplib::Result res;
    {
      Slot slot(*this);
      httplib::Client client(origin_);
      client.set_connection_timeout(params.timeout);
      client.set_read_timeout(params.timeout);
      client.set_write_timeout(params.timeout);
      res = client.Post(path_, headers, body, "application/json");
    }

    if (!res) {
      const httplib::Error err = res.error();
      const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                             err == httplib::Error::ConnectionTimeout;
      if (timed_out) ++timeouts;
      last_failure = timed_out ? "timed out" : "transport error: " + httplib::to_string(err);
      logger_->warn("attempt {}/{} failed: {}", attempt + 1, attempts, last_failure);
      continue;
    }

    logger_->debug("status {} body={}", res->status, redact(res->body, settings_.api_key));
    if (res->status >= 200 && res->status < 300) return extract_content(res->body);
    if (!retryable_status(res->status)) throw RemoteError(res->status, redact(excerpt(res->body), settings_.api_key));
    last_failure = "status " + std::to_string(res->status);
    logger_->warn("attempt {}/{} failed: {}", attempt + 1, attempts, last_failure);
  }
  if (timeouts == attempts) throw TimeoutError(attempts);
  throw ExhaustedRetries(attempts, last_failure);
}

}  // namespace nsg
