#pragma once

// Readers, segmentation, encodings, splits and statistical baselines for the
// wearable (HAR) and ambient (CASAS event log) dataset families.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a2v/ndcore.hpp"
#include "a2v/window.hpp"

namespace a2v {

inline constexpr std::string_view kOtherActivity = "Other Activity";

struct Event {
    Timestamp time;
    std::string sensor;
    std::string status;
    std::optional<std::string> label;

    friend bool operator==(const Event&, const Event&) = default;
};

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    const bool commas = line.find(',') != std::string_view::npos;
    std::string cur;
    auto flush = [&] {
        // trim
        std::size_t a = cur.find_first_not_of(" \t\r");
        std::size_t b = cur.find_last_not_of(" \t\r");
        if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
        else if (commas) out.emplace_back();
        cur.clear();
    };
    for (char ch : line) {
        const bool sep = commas ? ch == ',' : (ch == ' ' || ch == '\t' || ch == '\r');
        if (sep) {
            if (commas || !cur.empty()) flush();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty() || commas) flush();
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

template <class Int>
bool parse_int(std::string_view s, Int& v) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

inline bool looks_like_date(std::string_view s) {
    return s.size() == 10 && s[4] == '-' && s[7] == '-';
}

inline bool parse_date(std::string_view s, std::chrono::sys_days& out) {
    using namespace std::chrono;
    int y = 0;
    unsigned m = 0, d = 0;
    if (!looks_like_date(s) || !parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
        !parse_int(s.substr(8, 2), d))
        return false;
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) return false;
    out = sys_days{ymd};
    return true;
}

// HH:MM:SS[.ffffff]; fractional part of up to 6 digits is right-padded.
inline bool parse_clock(std::string_view s, std::chrono::microseconds& out) {
    int hh = 0, mm = 0, ss = 0;
    if (s.size() < 8 || s[2] != ':' || s[5] != ':' || !parse_int(s.substr(0, 2), hh) ||
        !parse_int(s.substr(3, 2), mm) || !parse_int(s.substr(6, 2), ss))
        return false;
    if (hh > 23 || mm > 59 || ss > 60) return false;
    long long frac = 0;
    if (s.size() > 8) {
        if (s[8] != '.') return false;
        std::string_view digits = s.substr(9);
        if (digits.empty() || digits.size() > 6 || !parse_int(digits, frac) || frac < 0) return false;
        for (std::size_t i = digits.size(); i < 6; ++i) frac *= 10;
    }
    out = std::chrono::hours(hh) + std::chrono::minutes(mm) + std::chrono::seconds(ss) +
          std::chrono::microseconds(frac);
    return true;
}

}  // namespace detail

// Accepts "date time", "dateTtime" or a single field holding "date time".
inline std::optional<Timestamp> parse_timestamp(std::string_view date, std::string_view clock) {
    std::chrono::sys_days d;
    std::chrono::microseconds tod;
    if (!detail::parse_date(date, d) || !detail::parse_clock(clock, tod)) return std::nullopt;
    return Timestamp{d} + tod;
}

// Whitespace- or comma-delimited: <date> <time> <sensor> <status> [label...].
// Underscores in the label read as spaces.
inline Event parse_casas_line(std::string_view line, std::size_t line_no = 0) {
    const std::string where = "line " + std::to_string(line_no) + ": ";
    std::vector<std::string> f = detail::split_fields(line);
    if (f.empty()) throw data_error(where + "empty line");

    std::size_t next = 0;
    std::optional<Timestamp> ts;
    const std::string& first = f[0];
    const auto sep = first.find_first_of(" T");
    if (sep != std::string::npos && sep == 10) {
        ts = parse_timestamp(std::string_view(first).substr(0, 10),
                             std::string_view(first).substr(11));
        next = 1;
    } else if (f.size() >= 2 && detail::looks_like_date(first)) {
        ts = parse_timestamp(first, f[1]);
        next = 2;
    }
    if (!ts) throw data_error(where + "malformed timestamp in '" + std::string(line) + "'");
    if (f.size() < next + 2)
        throw data_error(where + "expected at least timestamp, sensor and status");

    Event e{*ts, f[next], f[next + 1], std::nullopt};
    if (e.sensor.empty()) throw data_error(where + "empty sensor id");
    std::string label;
    for (std::size_t i = next + 2; i < f.size(); ++i) {
        if (f[i].empty()) continue;
        if (!label.empty()) label.push_back(' ');
        label += f[i];
    }
    std::replace(label.begin(), label.end(), '_', ' ');
    if (!label.empty()) e.label = label;
    return e;
}

inline std::string format_casas_line(const Event& e) {
    std::string out = format_timestamp(e.time) + " " + e.sensor + " " + e.status;
    if (e.label) {
        std::string l = *e.label;
        std::replace(l.begin(), l.end(), ' ', '_');
        out += " " + l;
    }
    return out;
}

// Reads an event log, skipping blank and '#' lines; result is time-sorted (stable).
inline std::vector<Event> read_casas(std::istream& in) {
    std::vector<Event> events;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        events.push_back(parse_casas_line(line, n));
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    return events;
}

inline std::vector<Event> read_casas(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open CASAS file " + path.string());
    return read_casas(in);
}

// A fixed run of consecutive events before encoding.
struct EventWindow {
    std::size_t id = 0;
    std::vector<Event> events;
    std::string label;

    Timestamp start() const { return events.front().time; }
    Timestamp end() const { return events.back().time; }
};

// Majority label; ties go to the tied label occurring latest in the window.
// Unlabeled events count as "Other Activity".
inline std::string window_label(std::span<const Event> events) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // count, last index
    for (std::size_t i = 0; i < events.size(); ++i) {
        auto& s = stats[events[i].label.value_or(std::string(kOtherActivity))];
        ++s.first;
        s.second = i;
    }
    const std::string* best = nullptr;
    std::pair<std::size_t, std::size_t> key{0, 0};
    for (const auto& [label, s] : stats)
        if (!best || s > key) {
            best = &label;
            key = s;
        }
    return best ? *best : std::string(kOtherActivity);
}

inline std::vector<EventWindow> window_events(std::span<const Event> events, std::size_t k,
                                              std::size_t stride) {
    if (k < 1) throw usage_error("window length must be >= 1");
    if (stride < 1 || stride > k) throw usage_error("stride must be in [1, k]");
    std::vector<EventWindow> out;
    if (events.size() < k) return out;
    for (std::size_t begin = 0; begin + k <= events.size(); begin += stride) {
        EventWindow w;
        w.id = out.size();
        w.events.assign(events.begin() + begin, events.begin() + begin + k);
        w.label = window_label(w.events);
        out.push_back(std::move(w));
    }
    return out;
}

inline bool is_active_status(std::string_view status) {
    std::string s(status);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s == "ON" || s == "OPEN" || s == "PRESENT";
}

inline std::string sensor_family(std::string_view sensor) {
    std::size_t n = 0;
    while (n < sensor.size() && std::isalpha(static_cast<unsigned char>(sensor[n]))) ++n;
    return std::string(sensor.substr(0, n == 0 ? sensor.size() : n));
}

struct SensorVocab {
    std::vector<std::string> sensors;                             // lexicographic
    std::map<std::string, std::vector<std::string>> statuses;     // per sensor family

    std::optional<std::size_t> index_of(std::string_view sensor) const {
        auto it = std::lower_bound(sensors.begin(), sensors.end(), sensor);
        if (it == sensors.end() || *it != sensor) return std::nullopt;
        return static_cast<std::size_t>(it - sensors.begin());
    }
    std::size_t size() const { return sensors.size(); }
    // Columns of an encoded event: sensor one-hot, status pair, time of day.
    std::size_t encoded_dim() const { return sensors.size() + 3; }

    friend bool operator==(const SensorVocab&, const SensorVocab&) = default;
};

inline SensorVocab build_vocab(std::span<const EventWindow> training) {
    std::set<std::string> sensors;
    std::map<std::string, std::set<std::string>> statuses;
    for (const auto& w : training)
        for (const auto& e : w.events) {
            sensors.insert(e.sensor);
            statuses[sensor_family(e.sensor)].insert(e.status);
        }
    SensorVocab v;
    v.sensors.assign(sensors.begin(), sensors.end());
    for (auto& [fam, s] : statuses) v.statuses[fam].assign(s.begin(), s.end());
    return v;
}

inline double time_of_day_fraction(Timestamp ts) {
    return static_cast<double>(time_of_day(ts).count()) / 86'400'000'000.0;
}

// One row per event: sensor one-hot | [active, inactive] | seconds since midnight / 86400.
// Sensors absent from the vocabulary leave the sensor block zero and bump `unseen`.
inline Matrix encode_casas_window(const EventWindow& w, const SensorVocab& vocab,
                                  std::size_t* unseen = nullptr) {
    const std::size_t S = vocab.size();
    Matrix m(w.events.size(), vocab.encoded_dim());
    for (std::size_t t = 0; t < w.events.size(); ++t) {
        const Event& e = w.events[t];
        if (auto idx = vocab.index_of(e.sensor)) m(t, *idx) = 1.0;
        else if (unseen) ++*unseen;
        m(t, S + (is_active_status(e.status) ? 0 : 1)) = 1.0;
        m(t, S + 2) = time_of_day_fraction(e.time);
    }
    return m;
}

inline SensorWindow to_sensor_window(const EventWindow& w, const SensorVocab& vocab,
                                     std::size_t* unseen = nullptr) {
    SensorWindow s;
    s.id = w.id;
    s.data = encode_casas_window(w, vocab, unseen);
    s.label = w.label;
    s.start = w.start();
    s.end = w.end();
    s.source = Source::casas;
    return s;
}

// duration (s), start and end time of day (fraction of a day), distinct sensor
// count, dominant-sensor one-hot, per-vocabulary-sensor event counts.
inline Vector handcrafted_casas(const EventWindow& w, const SensorVocab& vocab) {
    const std::size_t S = vocab.size();
    Vector f(4 + 2 * S, 0.0);
    if (w.events.empty()) return f;
    f[0] = static_cast<double>((w.end() - w.start()).count()) / 1e6;
    f[1] = time_of_day_fraction(w.start());
    f[2] = time_of_day_fraction(w.end());
    std::map<std::string, std::size_t> counts;
    for (const auto& e : w.events) ++counts[e.sensor];
    f[3] = static_cast<double>(counts.size());
    const std::string* dominant = nullptr;
    std::size_t best = 0;
    for (const auto& [sensor, c] : counts)  // lexicographic order, strict > keeps the first
        if (c > best) {
            best = c;
            dominant = &sensor;
        }
    if (dominant)
        if (auto idx = vocab.index_of(*dominant)) f[4 + *idx] = 1.0;
    for (const auto& [sensor, c] : counts)
        if (auto idx = vocab.index_of(sensor)) f[4 + S + *idx] = static_cast<double>(c);
    return f;
}

inline std::vector<std::string> handcrafted_casas_names(const SensorVocab& vocab) {
    std::vector<std::string> n{"duration_s", "start_tod", "end_tod", "distinct_sensors"};
    for (const auto& s : vocab.sensors) n.push_back("dominant_" + s);
    for (const auto& s : vocab.sensors) n.push_back("count_" + s);
    return n;
}

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Calendar days from the first window's day are cut into blocks of six:
// four training days then two test days. A trailing partial block is dropped.
// A window belongs to a side only if it starts and ends within that side's
// days of one block; windows straddling a train/test boundary are dropped.
inline std::vector<Fold> split_hh101(std::span<const SensorWindow> windows) {
    using namespace std::chrono;
    std::vector<sys_days> first_day(windows.size()), last_day(windows.size());
    std::optional<sys_days> first, last;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!windows[i].start)
            throw data_error("window " + std::to_string(windows[i].id) + " has no start timestamp");
        first_day[i] = floor<days>(*windows[i].start);
        last_day[i] = windows[i].end ? floor<days>(*windows[i].end) : first_day[i];
        if (!first || first_day[i] < *first) first = first_day[i];
        if (!last || last_day[i] > *last) last = last_day[i];
    }
    const long span = first ? (*last - *first).count() + 1 : 0;
    if (span < 6)
        throw data_error("need at least 6 calendar days for the 4+2 day split, got " +
                         std::to_string(span));
    const std::size_t blocks = static_cast<std::size_t>(span / 6);
    std::vector<Fold> folds(blocks);
    auto side = [](long d) { return d % 6 < 4; };
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const long a = (first_day[i] - *first).count(), b = (last_day[i] - *first).count();
        const std::size_t block = static_cast<std::size_t>(a / 6);
        if (block >= blocks || b / 6 != a / 6 || side(a) != side(b)) continue;
        (side(a) ? folds[block].train : folds[block].test).push_back(i);
    }
    return folds;
}

struct NormStats {
    Vector mean;
    Vector stddev;
    std::vector<bool> constant;  // zero-variance channels, passed through unchanged

    std::size_t size() const { return mean.size(); }
    bool any_constant() const { return std::find(constant.begin(), constant.end(), true) != constant.end(); }

    friend bool operator==(const NormStats&, const NormStats&) = default;
};

// Population mean/std per column of `rows` (samples x channels).
inline NormStats fit_normalize(const Matrix& rows) {
    if (rows.rows() == 0) throw data_error("cannot fit normalization on an empty training set");
    const std::size_t C = rows.cols();
    NormStats s{Vector(C, 0.0), Vector(C, 0.0), std::vector<bool>(C, false)};
    const double n = static_cast<double>(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r)
        for (std::size_t c = 0; c < C; ++c) s.mean[c] += rows(r, c);
    for (double& m : s.mean) m /= n;
    for (std::size_t r = 0; r < rows.rows(); ++r)
        for (std::size_t c = 0; c < C; ++c) {
            const double d = rows(r, c) - s.mean[c];
            s.stddev[c] += d * d;
        }
    for (std::size_t c = 0; c < C; ++c) {
        s.stddev[c] = std::sqrt(s.stddev[c] / n);
        if (!(s.stddev[c] > 1e-12)) {
            s.constant[c] = true;
            s.stddev[c] = 1.0;
        }
    }
    return s;
}

// Channel statistics over every timestep of every window.
inline NormStats fit_normalize(std::span<const SensorWindow> training) {
    std::size_t total = 0, C = 0;
    for (const auto& w : training) {
        total += w.data.rows();
        C = w.data.cols();
    }
    Matrix stacked(total, C);
    std::size_t r = 0;
    for (const auto& w : training)
        for (std::size_t t = 0; t < w.data.rows(); ++t, ++r)
            std::copy(w.data.row(t).begin(), w.data.row(t).end(), stacked.row(r).begin());
    return fit_normalize(stacked);
}

inline Matrix apply_normalize(Matrix x, const NormStats& s) {
    if (x.cols() != s.size())
        throw data_error("normalization has " + std::to_string(s.size()) + " channels, data has " +
                         std::to_string(x.cols()));
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
            if (!s.constant[c]) x(r, c) = (x(r, c) - s.mean[c]) / s.stddev[c];
    return x;
}

inline void apply_normalize(std::vector<SensorWindow>& windows, const NormStats& s) {
    for (auto& w : windows) w.data = apply_normalize(std::move(w.data), s);
}

// ---- HAR ---------------------------------------------------------------

inline constexpr std::size_t kHarSteps = 128;
inline constexpr std::array<std::string_view, 9> kHarChannels{
    "body_acc_x", "body_acc_y", "body_acc_z", "body_gyro_x", "body_gyro_y",
    "body_gyro_z", "total_acc_x", "total_acc_y", "total_acc_z"};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw data_error("missing file " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Rows of whitespace-separated numbers.
inline std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& p) {
    const std::string text = read_file(p);
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        ++line_no;
        std::vector<double> row;
        const char* c = text.data() + pos;
        const char* e = text.data() + eol;
        while (c < e) {
            while (c < e && (*c == ' ' || *c == '\t' || *c == '\r')) ++c;
            if (c >= e) break;
            if (*c == '+') ++c;
            double v = 0.0;
            auto [next, ec] = std::from_chars(c, e, v);
            if (ec != std::errc())
                throw data_error(p.string() + ":" + std::to_string(line_no) + ": bad number");
            row.push_back(v);
            c = next;
        }
        if (!row.empty()) rows.push_back(std::move(row));
        pos = eol + 1;
    }
    return rows;
}

}  // namespace detail

inline std::string har_label_name(std::string raw) {
    std::transform(raw.begin(), raw.end(), raw.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::replace(raw.begin(), raw.end(), '_', ' ');
    return raw;
}

// Label id -> activity name, from activity_labels.txt when present.
inline std::map<int, std::string> har_label_map(const std::filesystem::path& root) {
    std::map<int, std::string> m{{1, "walking"}, {2, "walking upstairs"}, {3, "walking downstairs"},
                                 {4, "sitting"}, {5, "standing"},         {6, "laying"}};
    const auto file = root / "activity_labels.txt";
    if (!std::filesystem::exists(file)) return m;
    std::ifstream in(file);
    std::string line;
    m.clear();
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        int id;
        std::string name;
        if (ls >> id >> name) m[id] = har_label_name(name);
    }
    return m;
}

inline std::vector<SensorWindow> load_har_split(const std::filesystem::path& root,
                                                const std::string& split,
                                                const std::map<int, std::string>& labels) {
    const auto dir = root / split;
    const auto signals = dir / "Inertial Signals";
    std::vector<std::vector<std::vector<double>>> channels;
    for (auto ch : kHarChannels) {
        const auto file = signals / (std::string(ch) + "_" + split + ".txt");
        if (!std::filesystem::exists(file)) throw data_error("missing HAR channel file " + file.string());
        channels.push_back(detail::read_numeric_rows(file));
    }
    const auto y = detail::read_numeric_rows(dir / ("y_" + split + ".txt"));
    const std::size_t n = channels[0].size();
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (channels[c].size() != n)
            throw data_error("HAR channel " + std::string(kHarChannels[c]) + " (" + split + ") has " +
                             std::to_string(channels[c].size()) + " rows, expected " +
                             std::to_string(n));
        for (std::size_t r = 0; r < n; ++r)
            if (channels[c][r].size() != kHarSteps)
                throw data_error("HAR channel " + std::string(kHarChannels[c]) + " row " +
                                 std::to_string(r + 1) + " has " +
                                 std::to_string(channels[c][r].size()) + " readings, expected 128");
    }
    if (y.size() != n)
        throw data_error("HAR label file y_" + split + ".txt has " + std::to_string(y.size()) +
                         " rows, expected " + std::to_string(n));

    std::vector<SensorWindow> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        SensorWindow& w = out[r];
        w.id = r;
        w.source = Source::har;
        const int id = static_cast<int>(y[r].at(0));
        auto it = labels.find(id);
        if (it == labels.end()) throw data_error("unknown HAR label id " + std::to_string(id));
        w.label = it->second;
        w.data = Matrix(kHarSteps, kHarChannels.size());
        for (std::size_t c = 0; c < kHarChannels.size(); ++c)
            for (std::size_t t = 0; t < kHarSteps; ++t) w.data(t, c) = channels[c][r][t];
    }
    return out;
}

struct HarData {
    std::vector<SensorWindow> train;
    std::vector<SensorWindow> test;
};

// The distribution's own volunteer-based train/test split is used verbatim.
// Test window ids continue after the training ids.
inline HarData load_har(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) throw data_error("HAR directory not found: " + root.string());
    const auto labels = har_label_map(root);
    HarData d{load_har_split(root, "train", labels), load_har_split(root, "test", labels)};
    for (auto& w : d.test) w.id += d.train.size();
    return d;
}

// Per channel: mean, population variance, min, max (channel-major).
inline Vector handcrafted_har(const SensorWindow& w) {
    const std::size_t T = w.data.rows(), C = w.data.cols();
    Vector f;
    f.reserve(4 * C);
    for (std::size_t c = 0; c < C; ++c) {
        double sum = 0.0, mn = w.data(0, c), mx = w.data(0, c);
        for (std::size_t t = 0; t < T; ++t) {
            const double v = w.data(t, c);
            sum += v;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        const double mean = sum / static_cast<double>(T);
        double var = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double d = w.data(t, c) - mean;
            var += d * d;
        }
        f.insert(f.end(), {mean, var / static_cast<double>(T), mn, mx});
    }
    return f;
}

inline std::vector<std::string> handcrafted_har_names(std::size_t channels = kHarChannels.size()) {
    std::vector<std::string> n;
    for (std::size_t c = 0; c < channels; ++c) {
        const std::string ch = c < kHarChannels.size() ? std::string(kHarChannels[c]) : "ch" + std::to_string(c);
        for (auto stat : {"mean", "var", "min", "max"}) n.push_back(ch + "_" + stat);
    }
    return n;
}

// Row-major flattening of each window; all windows must share a shape.
inline Matrix flatten_windows(std::span<const SensorWindow> windows) {
    if (windows.empty()) return {};
    const std::size_t F = windows.front().data.size();
    Matrix X(windows.size(), F);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].data.size() != F)
            throw data_error("raw features need equal-shape windows");
        std::copy(windows[i].data.values().begin(), windows[i].data.values().end(), X.row(i).begin());
    }
    return X;
}

inline Matrix stack_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) return {};
    Matrix X(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), X.row(i).begin());
    return X;
}

// Class-stratified subsample keeping at most `limit` windows, original order preserved.
inline std::vector<SensorWindow> stratified_subsample(const std::vector<SensorWindow>& windows,
                                                      std::size_t limit, Rng& rng) {
    if (windows.size() <= limit) return windows;
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < windows.size(); ++i) by_class[windows[i].label].push_back(i);
    std::vector<std::size_t> keep;
    const double frac = static_cast<double>(limit) / static_cast<double>(windows.size());
    for (auto& [label, idx] : by_class) {
        rng.shuffle(idx);
        const auto take = static_cast<std::size_t>(std::floor(frac * static_cast<double>(idx.size())));
        keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(keep.begin(), keep.end());
    std::vector<SensorWindow> out;
    for (std::size_t i : keep) out.push_back(windows[i]);
    return out;
}

}  // namespace a2v
