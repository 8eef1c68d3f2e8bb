#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>

#include "a2v/ndcore.hpp"

namespace a2v {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

enum class Source { har, casas, synthetic };

inline std::string to_string(Source s) {
    switch (s) {
        case Source::har: return "har";
        case Source::casas: return "casas";
        case Source::synthetic: return "synthetic";
    }
    return "?";
}

// "YYYY-MM-DD HH:MM:SS.ffffff"
inline std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day = floor<days>(ts);
    const year_month_day ymd{day};
    const hh_mm_ss<microseconds> tod{ts - day};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld.%06lld",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long long>(tod.hours().count()),
                  static_cast<long long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()),
                  static_cast<long long>(tod.subseconds().count()));
    return buf;
}

inline std::chrono::microseconds time_of_day(Timestamp ts) {
    return ts - std::chrono::floor<std::chrono::days>(ts);
}

// One labeled sequence. Ambient windows also carry their time span.
struct SensorWindow {
    std::size_t id = 0;
    Matrix data;  // T x D
    std::string label;
    std::optional<Timestamp> start;
    std::optional<Timestamp> end;
    Source source = Source::synthetic;
};

}  // namespace a2v
