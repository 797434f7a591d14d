#pragma once

// HTTP transports for knowledge-base queries. Responses can be recorded into an
// archive (one JSON file per request, named by the request hash) and replayed
// offline.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace streetonomics {

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string content_type;
  std::string body;
};

/// Stable hash identifying a request: SHA-256 over method, URL and body.
/// Headers are deliberately excluded so user-agent changes do not invalidate archives.
std::string request_key(const HttpRequest& request);

std::string url_encode(std::string_view s);

class Transport {
public:
  virtual ~Transport() = default;
  /// Throws NetworkError when no response could be obtained.
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// Live HTTP(S) via cpp-httplib.
class HttpClientTransport final : public Transport {
public:
  explicit HttpClientTransport(std::chrono::seconds timeout = std::chrono::seconds(60))
      : timeout_(timeout) {}
  HttpResponse send(const HttpRequest& request) override;

private:
  std::chrono::seconds timeout_;
};

class ResponseArchive {
public:
  explicit ResponseArchive(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<HttpResponse> load(const HttpRequest& request) const;
  void store(const HttpRequest& request, const HttpResponse& response) const;
  std::filesystem::path path_for(const HttpRequest& request) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

private:
  std::filesystem::path dir_;
};

/// Forwards to an upstream transport and records every successful response.
class RecordingTransport final : public Transport {
public:
  RecordingTransport(Transport& upstream, const ResponseArchive& archive)
      : upstream_(upstream), archive_(archive) {}
  HttpResponse send(const HttpRequest& request) override;

private:
  Transport& upstream_;
  const ResponseArchive& archive_;
};

/// Serves responses from an archive only; a missing entry is a NetworkError.
class ReplayTransport final : public Transport {
public:
  explicit ReplayTransport(const ResponseArchive& archive) : archive_(archive) {}
  HttpResponse send(const HttpRequest& request) override;
  std::size_t served() const noexcept { return served_; }

private:
  const ResponseArchive& archive_;
  std::atomic<std::size_t> served_{0};
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
};

/// Retries network failures and 429/5xx statuses with doubling backoff, then
/// throws NetworkError.
class RetryingTransport final : public Transport {
public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RetryingTransport(Transport& upstream, RetryPolicy policy, Sleeper sleeper = {});
  HttpResponse send(const HttpRequest& request) override;

private:
  Transport& upstream_;
  RetryPolicy policy_;
  Sleeper sleep_;
};

/// Spaces request starts at least 1/rate seconds apart, across threads.
class RateLimiter {
public:
  explicit RateLimiter(double requests_per_second);
  void acquire();

private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

}  // namespace streetonomics
