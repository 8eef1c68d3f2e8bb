#pragma once

// Plain-text model file. Header lines carry the schema version, the seed, the
// dataset descriptor needed to encode new data the same way (input width,
// CASAS vocabulary, per-channel normalization), then every parameter block in
// Seq2SeqModel::visit order with values printed at 17 significant digits so a
// reload is bit-exact.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "a2v/config.hpp"
#include "a2v/error.hpp"
#include "a2v/ingest.hpp"
#include "a2v/seqmodel.hpp"

namespace a2v {

inline constexpr std::uint32_t kModelSchemaVersion = 1;

struct ModelFile {
    std::uint32_t schema_version = kModelSchemaVersion;
    std::uint64_t seed = 0;
    DatasetKind dataset = DatasetKind::synthetic;
    SensorVocab vocab;  // CASAS only
    NormStats norm;     // empty when inputs are used as-is
    Seq2SeqModel model;
};

namespace detail {

inline void write_values(std::ostream& os, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v[i]);
}

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string word(const char* what) {
        std::string s;
        if (!(in_ >> s)) throw data_error(std::string("model file truncated: expected ") + what);
        return s;
    }
    void expect(const std::string& key) {
        const std::string got = word(key.c_str());
        if (got != key) throw data_error("model file: expected '" + key + "', found '" + got + "'");
    }
    std::uint64_t count(const char* what) {
        const std::string s = word(what);
        std::uint64_t v = 0;
        if (!parse_int(s, v)) throw data_error(std::string("model file: bad ") + what + " '" + s + "'");
        return v;
    }
    double real(const char* what) {
        const std::string s = word(what);
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw data_error(std::string("model file: bad ") + what + " '" + s + "'");
        return v;
    }

private:
    std::istream& in_;
};

}  // namespace detail

inline void write_model_file(std::ostream& os, const ModelFile& f) {
    const auto& m = f.model;
    os << "a2v-model\n"
       << "schema_version " << kModelSchemaVersion << "\n"
       << "seed " << f.seed << "\n"
       << "dataset " << to_string(f.dataset) << "\n"
       << "input_dim " << m.input_dim() << "\n"
       << "embedding_dim " << m.embedding_dim() << "\n"
       << "mode " << to_string(m.mode) << "\n"
       << "output " << to_string(m.output) << "\n";
    os << "vocab " << f.vocab.sensors.size();
    for (const auto& s : f.vocab.sensors) os << ' ' << s;
    os << "\nstatus_families " << f.vocab.statuses.size() << "\n";
    for (const auto& [fam, st] : f.vocab.statuses) {
        os << fam << ' ' << st.size();
        for (const auto& s : st) os << ' ' << s;
        os << '\n';
    }
    os << "norm " << f.norm.size() << "\n";
    if (f.norm.size() > 0) {
        os << "mean ";
        detail::write_values(os, f.norm.mean);
        os << "\nstd ";
        detail::write_values(os, f.norm.stddev);
        os << "\nconstant";
        for (bool b : f.norm.constant) os << ' ' << (b ? 1 : 0);
        os << '\n';
    }
    Seq2SeqModel::visit(m, [&](const std::string& name, const Matrix& b) {
        os << "block " << name << ' ' << b.rows() << ' ' << b.cols() << '\n';
        for (std::size_t r = 0; r < b.rows(); ++r) {
            detail::write_values(os, b.row(r));
            os << '\n';
        }
    });
    os << "end\n";
}

inline ModelFile read_model_file(std::istream& in) {
    detail::TokenReader rd(in);
    ModelFile f;
    if (rd.word("magic") != "a2v-model") throw data_error("not an a2v model file");
    rd.expect("schema_version");
    const auto version = rd.count("schema version");
    if (version != kModelSchemaVersion)
        throw data_error("model schema version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kModelSchemaVersion) + ")");
    rd.expect("seed");
    f.seed = rd.count("seed");
    rd.expect("dataset");
    try {
        f.dataset = parse_dataset_kind(rd.word("dataset kind"));
    } catch (const Error& e) {
        throw data_error(std::string("model file: ") + e.what());
    }
    rd.expect("input_dim");
    const auto D = rd.count("input_dim");
    rd.expect("embedding_dim");
    const auto E = rd.count("embedding_dim");
    rd.expect("mode");
    const auto mode_s = rd.word("mode");
    rd.expect("output");
    const auto out_s = rd.word("output");
    try {
        f.model = Seq2SeqModel::zeros(D, E, parse_decoder_mode(mode_s), parse_output_activation(out_s));
    } catch (const Error& e) {
        throw data_error(std::string("model file: ") + e.what());
    }

    rd.expect("vocab");
    const auto S = rd.count("vocabulary size");
    for (std::uint64_t i = 0; i < S; ++i) f.vocab.sensors.push_back(rd.word("sensor name"));
    rd.expect("status_families");
    const auto F = rd.count("status family count");
    for (std::uint64_t i = 0; i < F; ++i) {
        const std::string fam = rd.word("sensor family");
        const auto n = rd.count("status count");
        auto& v = f.vocab.statuses[fam];
        for (std::uint64_t j = 0; j < n; ++j) v.push_back(rd.word("status"));
    }

    rd.expect("norm");
    const auto C = rd.count("norm size");
    if (C > 0) {
        rd.expect("mean");
        for (std::uint64_t i = 0; i < C; ++i) f.norm.mean.push_back(rd.real("norm mean"));
        rd.expect("std");
        for (std::uint64_t i = 0; i < C; ++i) f.norm.stddev.push_back(rd.real("norm std"));
        rd.expect("constant");
        for (std::uint64_t i = 0; i < C; ++i) f.norm.constant.push_back(rd.count("norm flag") != 0);
    }

    Seq2SeqModel::visit(f.model, [&](const std::string& name, Matrix& b) {
        rd.expect("block");
        rd.expect(name);
        const auto r = rd.count("block rows");
        const auto c = rd.count("block cols");
        if (r != b.rows() || c != b.cols())
            throw data_error("model file: block " + name + " is " + std::to_string(r) + "x" + std::to_string(c) +
                             ", expected " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = rd.real("parameter value");
    });
    rd.expect("end");
    return f;
}

inline void save_model_file(const std::filesystem::path& p, const ModelFile& f) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw data_error("cannot write model file " + p.string());
    write_model_file(os, f);
    if (!os) throw data_error("failed writing model file " + p.string());
}

inline ModelFile load_model_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw data_error("cannot open model file " + p.string());
    return read_model_file(in);
}

}  // namespace a2v
