#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "kgreason/http.hpp"

#include <thread>

#include "httplib.h"

namespace kgreason {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw HttpError("malformed URL: " + url, 0, false);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse http_post(const HttpRequest& request, const RetryPolicy& retry) {
    auto [origin, path] = split_url(request.url);
    httplib::Headers headers(request.headers.begin(), request.headers.end());

    auto backoff = retry.initial_backoff;
    std::string last_error;
    int last_status = 0;
    const int attempts = std::max(1, retry.attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        httplib::Client client(origin);
        client.set_connection_timeout(request.timeout);
        client.set_read_timeout(request.timeout);
        client.set_write_timeout(request.timeout);

        auto res = client.Post(path, headers, request.body, request.content_type);
        if (res) {
            last_status = res->status;
            if (res->status >= 200 && res->status < 300) return {res->status, res->body};
            bool retryable = res->status == 429 || res->status >= 500;
            last_error = "HTTP " + std::to_string(res->status) + " from " + request.url;
            if (!res->body.empty()) last_error += ": " + res->body.substr(0, 300);
            if (!retryable) throw HttpError(last_error, res->status, false);
        } else {
            last_status = 0;
            last_error = "request to " + request.url + " failed: " + httplib::to_string(res.error());
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw HttpError(last_error + " (after " + std::to_string(attempts) + " attempts)", last_status, true);
}

}  // namespace kgreason
