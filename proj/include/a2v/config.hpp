#pragma once

// Experiment configuration and its plain-text form:
//
//   # comment
//   [section]
//   key = value
//
// Every key has a default; unknown sections or keys are rejected.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "a2v/error.hpp"
#include "a2v/ingest.hpp"
#include "a2v/seqmodel.hpp"
#include "a2v/trainer.hpp"

namespace a2v {

enum class DatasetKind { synthetic, har, casas };

inline std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::synthetic: return "synthetic";
        case DatasetKind::har: return "har";
        case DatasetKind::casas: return "casas";
    }
    return "?";
}
inline DatasetKind parse_dataset_kind(std::string_view s) {
    if (s == "synthetic") return DatasetKind::synthetic;
    if (s == "har") return DatasetKind::har;
    if (s == "casas") return DatasetKind::casas;
    throw usage_error("unknown dataset kind '" + std::string(s) + "'");
}

struct DatasetConfig {
    DatasetKind kind = DatasetKind::synthetic;
    std::string path;
    std::size_t k = 30;          // CASAS events per window
    std::size_t stride = 15;     // CASAS window step
    std::size_t max_train = 0;   // 0 keeps every window
    std::size_t max_test = 0;
    std::size_t per_class = 20;  // synthetic windows per class
    std::size_t steps = 32;      // synthetic sequence length
    double phase_spread = std::numbers::pi / 4.0;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct EvalConfig {
    std::size_t n_trees = 100;
    std::string features = "activity2vec";
    bool fold_average = false;  // CASAS: average per-fold F1 instead of pooling predictions

    friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    TrainConfig trainer;
    EvalConfig eval;
    std::string output_dir = "a2v_out";
};

inline bool operator==(const AdamConfig& a, const AdamConfig& b) {
    return a.lr == b.lr && a.beta1 == b.beta1 && a.beta2 == b.beta2 && a.eps == b.eps;
}
inline bool operator==(const TrainConfig& a, const TrainConfig& b) {
    return a.epochs == b.epochs && a.embedding_dim == b.embedding_dim && a.noise_std == b.noise_std &&
           a.l1_lambda == b.l1_lambda && a.l1_target == b.l1_target && a.adam == b.adam &&
           a.seed == b.seed && a.batch == b.batch && a.checkpoint_every == b.checkpoint_every &&
           a.mode == b.mode && a.output == b.output;
}
inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.dataset == b.dataset && a.trainer == b.trainer && a.eval == b.eval &&
           a.output_dir == b.output_dir;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
    std::size_t n = 0;
    if (!parse_int(v, n)) throw usage_error("config key '" + key + "' expects a count, got '" + v + "'");
    return n;
}
inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t n = 0;
    if (!parse_int(v, n)) throw usage_error("config key '" + key + "' expects an integer, got '" + v + "'");
    return n;
}
inline double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw usage_error("config key '" + key + "' expects a number, got '" + v + "'");
}
inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw usage_error("config key '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace detail

inline void apply_config_value(ExperimentConfig& c, const std::string& section, const std::string& key,
                               const std::string& v) {
    using namespace detail;
    const std::string full = section + "." + key;
    auto& d = c.dataset;
    auto& t = c.trainer;
    if (full == "dataset.kind") d.kind = parse_dataset_kind(v);
    else if (full == "dataset.path") d.path = v;
    else if (full == "dataset.k") d.k = to_count(full, v);
    else if (full == "dataset.stride") d.stride = to_count(full, v);
    else if (full == "dataset.max_train") d.max_train = to_count(full, v);
    else if (full == "dataset.max_test") d.max_test = to_count(full, v);
    else if (full == "dataset.per_class") d.per_class = to_count(full, v);
    else if (full == "dataset.steps") d.steps = to_count(full, v);
    else if (full == "dataset.phase_spread") d.phase_spread = to_real(full, v);
    else if (full == "model.embedding_dim") t.embedding_dim = to_count(full, v);
    else if (full == "model.mode") t.mode = parse_decoder_mode(v);
    else if (full == "model.output") t.output = parse_output_activation(v);
    else if (full == "trainer.epochs") t.epochs = to_count(full, v);
    else if (full == "trainer.lr") t.adam.lr = to_real(full, v);
    else if (full == "trainer.beta1") t.adam.beta1 = to_real(full, v);
    else if (full == "trainer.beta2") t.adam.beta2 = to_real(full, v);
    else if (full == "trainer.adam_eps") t.adam.eps = to_real(full, v);
    else if (full == "trainer.noise_std") t.noise_std = to_real(full, v);
    else if (full == "trainer.l1_lambda") t.l1_lambda = to_real(full, v);
    else if (full == "trainer.l1_target") t.l1_target = parse_l1_target(v);
    else if (full == "trainer.seed") t.seed = to_u64(full, v);
    else if (full == "trainer.batch") t.batch = parse_batch_mode(v);
    else if (full == "trainer.checkpoint_every") t.checkpoint_every = to_count(full, v);
    else if (full == "eval.n_trees") c.eval.n_trees = to_count(full, v);
    else if (full == "eval.features") c.eval.features = v;
    else if (full == "eval.fold_average") c.eval.fold_average = to_bool(full, v);
    else if (full == "output.dir") c.output_dir = v;
    else throw usage_error("unknown config key '" + full + "'");
}

inline void read_config(std::istream& in, ExperimentConfig& c) {
    std::string line, section;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw usage_error("config line " + std::to_string(n) + ": bad section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw usage_error("config line " + std::to_string(n) + ": expected key = value");
        if (section.empty())
            throw usage_error("config line " + std::to_string(n) + ": key outside a section");
        apply_config_value(c, section, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
    read_config(in, base);
    return base;
}

inline ExperimentConfig load_config(const std::filesystem::path& p, ExperimentConfig base = {}) {
    std::ifstream in(p);
    if (!in) throw usage_error("cannot open config file " + p.string());
    return parse_config(in, std::move(base));
}

inline void write_config(std::ostream& os, const ExperimentConfig& c) {
    const auto& d = c.dataset;
    const auto& t = c.trainer;
    os << "[dataset]\n"
       << "kind = " << to_string(d.kind) << "\n"
       << "path = " << d.path << "\n"
       << "k = " << d.k << "\n"
       << "stride = " << d.stride << "\n"
       << "max_train = " << d.max_train << "\n"
       << "max_test = " << d.max_test << "\n"
       << "per_class = " << d.per_class << "\n"
       << "steps = " << d.steps << "\n"
       << "phase_spread = " << format_double(d.phase_spread) << "\n\n"
       << "[model]\n"
       << "embedding_dim = " << t.embedding_dim << "\n"
       << "mode = " << to_string(t.mode) << "\n"
       << "output = " << to_string(t.output) << "\n\n"
       << "[trainer]\n"
       << "epochs = " << t.epochs << "\n"
       << "lr = " << format_double(t.adam.lr) << "\n"
       << "beta1 = " << format_double(t.adam.beta1) << "\n"
       << "beta2 = " << format_double(t.adam.beta2) << "\n"
       << "adam_eps = " << format_double(t.adam.eps) << "\n"
       << "noise_std = " << format_double(t.noise_std) << "\n"
       << "l1_lambda = " << format_double(t.l1_lambda) << "\n"
       << "l1_target = " << to_string(t.l1_target) << "\n"
       << "seed = " << t.seed << "\n"
       << "batch = " << to_string(t.batch) << "\n"
       << "checkpoint_every = " << t.checkpoint_every << "\n\n"
       << "[eval]\n"
       << "n_trees = " << c.eval.n_trees << "\n"
       << "features = " << c.eval.features << "\n"
       << "fold_average = " << (c.eval.fold_average ? "true" : "false") << "\n\n"
       << "[output]\n"
       << "dir = " << c.output_dir << "\n";
}

inline std::string config_to_string(const ExperimentConfig& c) {
    std::ostringstream ss;
    write_config(ss, c);
    return ss.str();
}

}  // namespace a2v
