#include "streetonomics/transport.hpp"

#include <cctype>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "streetonomics/error.hpp"
#include "streetonomics/hash.hpp"

namespace streetonomics {

namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string request_key(const HttpRequest& request) {
  std::string material = request.method;
  material += '\n';
  material += request.url;
  material += '\n';
  material += request.body;
  return sha256_hex(material);
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

HttpResponse HttpClientTransport::send(const HttpRequest& request) {
  const auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos) throw NetworkError("not an absolute URL: " + request.url);
  const auto path_start = request.url.find('/', scheme_end + 3);
  const std::string origin = request.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_follow_location(true);
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);

  httplib::Result result = request.method == "POST"
                               ? client.Post(path, headers, request.body, "application/x-www-form-urlencoded")
                               : client.Get(path, headers);
  if (!result) {
    throw NetworkError(request.method + " " + origin + ": " + httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.body = result->body;
  response.content_type = result->get_header_value("Content-Type");
  return response;
}

std::filesystem::path ResponseArchive::path_for(const HttpRequest& request) const {
  return dir_ / (request_key(request) + ".json");
}

std::optional<HttpResponse> ResponseArchive::load(const HttpRequest& request) const {
  const auto path = path_for(request);
  if (!std::filesystem::exists(path)) return std::nullopt;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
    HttpResponse response;
    response.status = doc.at("status").get<int>();
    response.content_type = doc.value("content_type", "");
    response.body = doc.at("response_body").get<std::string>();
    return response;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt archive entry " + path.string() + ": " + e.what());
  }
}

void ResponseArchive::store(const HttpRequest& request, const HttpResponse& response) const {
  nlohmann::ordered_json doc;
  doc["method"] = request.method;
  doc["url"] = request.url;
  doc["request_body"] = request.body;
  doc["status"] = response.status;
  doc["content_type"] = response.content_type;
  doc["response_body"] = response.body;
  write_file_atomic(path_for(request), doc.dump(2) + "\n");
}

HttpResponse RecordingTransport::send(const HttpRequest& request) {
  HttpResponse response = upstream_.send(request);
  if (response.status >= 200 && response.status < 300) archive_.store(request, response);
  return response;
}

HttpResponse ReplayTransport::send(const HttpRequest& request) {
  auto response = archive_.load(request);
  if (!response) {
    throw NetworkError("offline: no recorded response for " + request.method + " " +
                       request.url.substr(0, 120) + " (expected " +
                       archive_.path_for(request).string() + ")");
  }
  ++served_;
  return *response;
}

RetryingTransport::RetryingTransport(Transport& upstream, RetryPolicy policy, Sleeper sleeper)
    : upstream_(upstream), policy_(policy), sleep_(std::move(sleeper)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (policy_.max_attempts < 1) policy_.max_attempts = 1;
}

HttpResponse RetryingTransport::send(const HttpRequest& request) {
  auto backoff = policy_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    try {
      HttpResponse response = upstream_.send(request);
      if (!retryable_status(response.status)) return response;
      last_error = "HTTP status " + std::to_string(response.status);
    } catch (const NetworkError& e) {
      last_error = e.what();
    }
    if (attempt < policy_.max_attempts) {
      sleep_(backoff);
      backoff = std::min(backoff * 2, policy_.max_backoff);
    }
  }
  throw NetworkError("giving up after " + std::to_string(policy_.max_attempts) +
                     " attempts: " + last_error);
}

RateLimiter::RateLimiter(double requests_per_second) {
  if (!(requests_per_second > 0.0)) throw UsageError("rate limit must be positive");
  interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / requests_per_second));
  next_ = std::chrono::steady_clock::now();
}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

}  // namespace streetonomics
