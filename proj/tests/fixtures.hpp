#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "a2v/ingest.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(A2V_TEST_DATA); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("a2v_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.7e", v);
    return buf;
}

inline void write_text(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << s;
}

// A miniature copy of the HAR distribution layout. Labels cycle 1..6; signal
// values depend on the label so a classifier has something to find.
// `offset` shifts every test-split reading.
inline void write_har(const fs::path& root, std::size_t n_train, std::size_t n_test, unsigned seed = 1,
                      double offset = 0.0) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    write_text(root / "activity_labels.txt",
               "1 WALKING\n2 WALKING_UPSTAIRS\n3 WALKING_DOWNSTAIRS\n4 SITTING\n5 STANDING\n6 LAYING\n");
    for (const std::string split : {"train", "test"}) {
        const std::size_t n = split == "train" ? n_train : n_test;
        std::string y;
        for (std::size_t r = 0; r < n; ++r) y += std::to_string(r % 6 + 1) + "\n";
        write_text(root / split / ("y_" + split + ".txt"), y);
        for (std::size_t c = 0; c < a2v::kHarChannels.size(); ++c) {
            std::string body;
            for (std::size_t r = 0; r < n; ++r) {
                const double level = static_cast<double>(r % 6) * 0.3 + static_cast<double>(c) * 0.01;
                for (std::size_t t = 0; t < a2v::kHarSteps; ++t) {
                    const double v = level + noise(gen) + (split == "test" ? offset : 0.0);
                    body += (t ? "  " : " ") + sci(v);
                }
                body += "\n";
            }
            write_text(root / split / "Inertial Signals" /
                           (std::string(a2v::kHarChannels[c]) + "_" + split + ".txt"),
                       body);
        }
    }
}

// One event per `minutes` across `days` calendar days starting 2012-07-01,
// cycling sensors and activity labels.
inline std::string casas_log(int days, int minutes = 90, const std::vector<std::string>& extra_sensor_days = {}) {
    std::string out;
    const char* sensors[] = {"M001", "M002", "M003", "D001", "M004"};
    const char* labels[] = {"Sleep", "Cook", "Eat", "Relax"};
    int n = 0;
    for (int d = 0; d < days; ++d) {
        for (int m = 0; m < 24 * 60; m += minutes, ++n) {
            char date[16], clock[32];
            std::snprintf(date, sizeof date, "2012-07-%02d", 1 + d);
            std::snprintf(clock, sizeof clock, "%02d:%02d:%02d.%06d", m / 60, m % 60, n % 60, (n * 7919) % 1000000);
            std::string sensor = sensors[n % 5];
            for (const auto& s : extra_sensor_days)
                if (std::stoi(s.substr(0, s.find(':'))) == d && n % 3 == 0) sensor = s.substr(s.find(':') + 1);
            const std::string status = sensor[0] == 'D' ? (n % 2 ? "OPEN" : "CLOSE") : (n % 2 ? "ON" : "OFF");
            out += std::string(date) + " " + clock + " " + sensor + " " + status + " " + labels[(m / 360) % 4] + "\n";
        }
    }
    return out;
}

}  // namespace fixtures
