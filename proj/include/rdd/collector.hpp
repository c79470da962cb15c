#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rdd::collector {

struct ViewRequest {
    std::optional<std::pair<double, double>> location;  // lat, lng degrees
    std::optional<std::string> pano_id;
    int size_w = 640, size_h = 640;  // clamped to 640 per axis
    double heading = 0.0;            // [0, 360)
    double pitch = 0.0;              // [-90, 90]
    double fov = 90.0;               // (0, 120]
    std::string api_key;

    void validate() const;  // throws std::invalid_argument
};

/// Deterministic URL: alphabetical query params, floats with 6 decimals,
/// size as "WxH". The cache key is this string minus the key parameter.
std::string build_url(const ViewRequest& req, const std::string& endpoint_base);

/// Canonical query string without api_key; basis of the cache hash.
std::string cache_key_string(const ViewRequest& req);
std::string cache_hash(const ViewRequest& req);

struct FetchPolicy {
    double max_requests_per_second = 5.0;
    int max_retries = 3;
    double backoff_base_s = 0.5;
    std::filesystem::path cache_dir;

    void validate() const;
};

enum class FetchStatus { Fetched, Cached, Failed };

struct FetchRecord {
    std::string hash;
    FetchStatus status = FetchStatus::Failed;
    std::optional<std::string> capture_date;
    std::vector<uint8_t> bytes;
    std::string error;
};

struct HttpResponse {
    int status = 0;  // 0 means transport-level timeout/failure
    std::vector<uint8_t> body;
    std::optional<std::string> capture_date;  // from response metadata
};

using Transport = std::function<HttpResponse(const std::string& url)>;

/// Time source; tests drive a virtual clock so backoff runs instantly.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now_s() = 0;
    virtual void sleep_s(double seconds) = 0;
};

std::unique_ptr<Clock> system_clock();

class VirtualClock : public Clock {
public:
    double now_s() override { return t_; }
    void sleep_s(double seconds) override { t_ += seconds; }

private:
    double t_ = 0.0;
};

/// Rate-limited, retrying, cache-backed fetcher. Duplicate concurrent
/// requests for one hash coalesce into a single transport call.
class Fetcher {
public:
    Fetcher(FetchPolicy policy, Transport transport, Clock& clock);

    FetchRecord fetch(const ViewRequest& req, const std::string& endpoint_base);

private:
    FetchRecord fetch_locked(const ViewRequest& req, const std::string& endpoint_base);
    void rate_limit_wait();

    FetchPolicy policy_;
    Transport transport_;
    Clock& clock_;
    std::mutex mu_;
    std::map<std::string, FetchRecord> in_flight_done_;
    std::map<std::string, std::shared_ptr<std::mutex>> in_flight_;
    std::vector<double> recent_calls_;  // transport call timestamps
};

// ---------------------------------------------------------------------------
// Route sampling

/// Equirectangular arc-length resampling at spacing_m; one request per
/// (sample point, heading).
std::vector<ViewRequest> sample_route(const std::vector<std::pair<double, double>>& polyline,
                                      double spacing_m, const std::vector<double>& headings);

std::vector<std::pair<double, double>> read_route_json(const std::string& text);

}  // namespace rdd::collector
