#include "rdd/collector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace rdd::collector {

namespace {

std::string fmt6(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << v;
    return os.str();
}

constexpr int kMaxSide = 640;

std::string query_params(const ViewRequest& req, bool include_key) {
    // alphabetical parameter order is the cache-key contract
    const int w = std::min(req.size_w, kMaxSide);
    const int h = std::min(req.size_h, kMaxSide);
    std::vector<std::pair<std::string, std::string>> params;
    params.emplace_back("fov", fmt6(req.fov));
    params.emplace_back("heading", fmt6(req.heading));
    if (include_key) params.emplace_back("key", req.api_key);
    if (req.location)
        params.emplace_back("location", fmt6(req.location->first) + "," + fmt6(req.location->second));
    else
        params.emplace_back("pano", *req.pano_id);
    params.emplace_back("pitch", fmt6(req.pitch));
    params.emplace_back("size", std::to_string(w) + "x" + std::to_string(h));

    std::string out;
    for (const auto& [k, v] : params) {
        if (!out.empty()) out += '&';
        out += k + "=" + v;
    }
    return out;
}

std::string fnv1a_hex(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace

void ViewRequest::validate() const {
    if (location.has_value() == pano_id.has_value())
        throw std::invalid_argument("ViewRequest: exactly one of location/pano_id must be set");
    if (location) {
        if (location->first < -90.0 || location->first > 90.0)
            throw std::invalid_argument("ViewRequest: latitude out of [-90,90]");
        if (location->second < -180.0 || location->second > 180.0)
            throw std::invalid_argument("ViewRequest: longitude out of [-180,180]");
    }
    if (size_w < 1 || size_h < 1) throw std::invalid_argument("ViewRequest: size must be >= 1");
    if (heading < 0.0 || heading >= 360.0)
        throw std::invalid_argument("ViewRequest: heading out of [0,360)");
    if (pitch < -90.0 || pitch > 90.0)
        throw std::invalid_argument("ViewRequest: pitch out of [-90,90]");
    if (fov <= 0.0 || fov > 120.0) throw std::invalid_argument("ViewRequest: fov out of (0,120]");
}

std::string build_url(const ViewRequest& req, const std::string& endpoint_base) {
    req.validate();
    return endpoint_base + "?" + query_params(req, true);
}

std::string cache_key_string(const ViewRequest& req) {
    req.validate();
    return query_params(req, false);
}

std::string cache_hash(const ViewRequest& req) { return fnv1a_hex(cache_key_string(req)); }

void FetchPolicy::validate() const {
    if (max_requests_per_second <= 0.0)
        throw std::invalid_argument("FetchPolicy: rate must be > 0");
    if (max_retries < 0) throw std::invalid_argument("FetchPolicy: retries must be >= 0");
    if (backoff_base_s < 0.0)
        throw std::invalid_argument("FetchPolicy: backoff base must be >= 0");
}

namespace {

class SystemClock : public Clock {
public:
    double now_s() override {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
    void sleep_s(double seconds) override {
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
};

}  // namespace

std::unique_ptr<Clock> system_clock() { return std::make_unique<SystemClock>(); }

Fetcher::Fetcher(FetchPolicy policy, Transport transport, Clock& clock)
    : policy_(std::move(policy)), transport_(std::move(transport)), clock_(clock) {
    policy_.validate();
    if (!policy_.cache_dir.empty()) std::filesystem::create_directories(policy_.cache_dir);
}

void Fetcher::rate_limit_wait() {
    const double window = 1.0;
    const auto cap = static_cast<size_t>(std::ceil(policy_.max_requests_per_second));
    for (;;) {
        const double now = clock_.now_s();
        std::erase_if(recent_calls_, [&](double t) { return t <= now - window; });
        if (recent_calls_.size() < cap) {
            recent_calls_.push_back(now);
            return;
        }
        const double oldest = *std::min_element(recent_calls_.begin(), recent_calls_.end());
        clock_.sleep_s(std::max(1e-6, oldest + window - now));
    }
}

FetchRecord Fetcher::fetch(const ViewRequest& req, const std::string& endpoint_base) {
    const std::string hash = cache_hash(req);
    std::shared_ptr<std::mutex> gate;
    {
        std::lock_guard lg(mu_);
        auto it = in_flight_.find(hash);
        if (it == in_flight_.end())
            it = in_flight_.emplace(hash, std::make_shared<std::mutex>()).first;
        gate = it->second;
    }
    // per-hash serialization: a duplicate concurrent request waits here and
    // then hits the cache
    std::lock_guard hold(*gate);
    return fetch_locked(req, endpoint_base);
}

FetchRecord Fetcher::fetch_locked(const ViewRequest& req, const std::string& endpoint_base) {
    FetchRecord rec;
    rec.hash = cache_hash(req);

    const auto img_path = policy_.cache_dir / (rec.hash + ".img");
    const auto meta_path = policy_.cache_dir / (rec.hash + ".meta.json");
    if (!policy_.cache_dir.empty() && std::filesystem::exists(img_path)) {
        std::ifstream is(img_path, std::ios::binary);
        rec.bytes.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
        rec.status = FetchStatus::Cached;
        if (std::filesystem::exists(meta_path)) {
            std::ifstream ms(meta_path);
            nlohmann::json meta;
            ms >> meta;
            if (meta.contains("capture_date") && !meta["capture_date"].is_null())
                rec.capture_date = meta["capture_date"].get<std::string>();
        }
        return rec;
    }

    const std::string url = build_url(req, endpoint_base);
    for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
        if (attempt > 0)
            clock_.sleep_s(policy_.backoff_base_s * std::pow(2.0, attempt - 1));
        {
            std::lock_guard lg(mu_);
            rate_limit_wait();
        }
        HttpResponse resp = transport_(url);
        if (resp.status >= 200 && resp.status < 300) {
            rec.status = FetchStatus::Fetched;
            rec.bytes = std::move(resp.body);
            rec.capture_date = resp.capture_date;
            if (!policy_.cache_dir.empty()) {
                std::ofstream os(img_path, std::ios::binary);
                os.write(reinterpret_cast<const char*>(rec.bytes.data()),
                         static_cast<std::streamsize>(rec.bytes.size()));
                nlohmann::json meta = {{"query", cache_key_string(req)},
                                       {"capture_date", rec.capture_date
                                                            ? nlohmann::json(*rec.capture_date)
                                                            : nlohmann::json(nullptr)}};
                std::ofstream ms(meta_path);
                ms << meta.dump(2) << '\n';
            }
            return rec;
        }
        if (resp.status >= 400 && resp.status < 500) {
            rec.status = FetchStatus::Failed;
            rec.error = "HTTP " + std::to_string(resp.status) + " (permanent)";
            return rec;
        }
        rec.error = resp.status == 0 ? "transport timeout/failure"
                                     : "HTTP " + std::to_string(resp.status);
    }
    rec.status = FetchStatus::Failed;
    rec.error = "retries exhausted; last error: " + rec.error;
    return rec;
}

std::vector<ViewRequest> sample_route(const std::vector<std::pair<double, double>>& polyline,
                                      double spacing_m, const std::vector<double>& headings) {
    if (polyline.size() < 2)
        throw std::invalid_argument("sample_route: polyline needs at least 2 points");
    if (spacing_m <= 0.0) throw std::invalid_argument("sample_route: spacing must be > 0");

    constexpr double kMetersPerDegLat = 111320.0;
    const double lat0 = polyline.front().first * M_PI / 180.0;
    const double m_per_deg_lng = kMetersPerDegLat * std::cos(lat0);

    auto to_xy = [&](const std::pair<double, double>& p) {
        return std::pair<double, double>{p.second * m_per_deg_lng, p.first * kMetersPerDegLat};
    };

    std::vector<double> cumlen{0.0};
    for (size_t i = 1; i < polyline.size(); ++i) {
        auto [x0, y0] = to_xy(polyline[i - 1]);
        auto [x1, y1] = to_xy(polyline[i]);
        cumlen.push_back(cumlen.back() + std::hypot(x1 - x0, y1 - y0));
    }
    const double total = cumlen.back();
    if (total <= 0.0) throw std::invalid_argument("sample_route: degenerate polyline");

    std::vector<std::pair<double, double>> points;
    const int n = static_cast<int>(std::floor(total / spacing_m + 1e-9)) + 1;
    for (int k = 0; k < n; ++k) {
        const double target = k * spacing_m;
        size_t seg = 1;
        while (seg < cumlen.size() - 1 && cumlen[seg] < target) ++seg;
        const double seg_len = cumlen[seg] - cumlen[seg - 1];
        const double t = seg_len > 0.0 ? (target - cumlen[seg - 1]) / seg_len : 0.0;
        points.emplace_back(
            polyline[seg - 1].first + t * (polyline[seg].first - polyline[seg - 1].first),
            polyline[seg - 1].second + t * (polyline[seg].second - polyline[seg - 1].second));
    }

    std::vector<ViewRequest> out;
    for (const auto& p : points) {
        for (double h : headings) {
            ViewRequest req;
            req.location = p;
            req.heading = h;
            out.push_back(std::move(req));
        }
    }
    return out;
}

std::vector<std::pair<double, double>> read_route_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<std::pair<double, double>> out;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2)
            throw std::runtime_error("route file: expected [lat, lng] pairs");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

}  // namespace rdd::collector
