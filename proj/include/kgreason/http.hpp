#pragma once
// Thin blocking HTTP POST helper with bounded retries, shared by the SPARQL,
// chat-completion and embedding clients.

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>

namespace kgreason {

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};  // doubles after each failure
};

struct HttpRequest {
    std::string url;
    std::string body;
    std::string content_type;
    std::map<std::string, std::string> headers;
    std::chrono::seconds timeout{60};
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

class HttpError : public std::runtime_error {
public:
    HttpError(const std::string& what, int status, bool retryable)
        : std::runtime_error(what), status_(status), retryable_(retryable) {}
    int status() const { return status_; }
    bool retryable() const { return retryable_; }

private:
    int status_;
    bool retryable_;
};

// Network errors, 429 and 5xx are retried; other non-2xx answers fail
// immediately. Throws HttpError after the last attempt.
HttpResponse http_post(const HttpRequest& request, const RetryPolicy& retry);

}  // namespace kgreason
