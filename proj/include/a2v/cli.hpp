#pragma once

// Command-line front end. Everything runs in-process through run_cli so the
// test suite can drive the same code paths as the binary.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "a2v/config.hpp"
#include "a2v/error.hpp"
#include "a2v/eval.hpp"
#include "a2v/gradcheck.hpp"
#include "a2v/ingest.hpp"
#include "a2v/modelfile.hpp"
#include "a2v/synthetic.hpp"
#include "a2v/trainer.hpp"

namespace a2v::cli {

namespace fs = std::filesystem;

inline constexpr double kGradTolerance = 1e-4;

// Sub-seeds split off the master seed, one stream per consumer.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t stream) {
    return Rng(master).derive(stream).next_u64();
}
inline std::uint64_t forest_seed(std::uint64_t master, std::size_t fold = 0) {
    return Rng(master).derive(20).derive(fold).next_u64();
}

// ---------------------------------------------------------------- datasets

struct Dataset {
    DatasetKind kind = DatasetKind::synthetic;
    std::vector<SensorWindow> train, test;  // model-ready sequences
    Matrix hand_train, hand_test;           // normalized handcrafted features
    std::vector<std::string> hand_names;
    std::size_t n_folds = 0;                // CASAS day-block folds; 0 = single split
    std::vector<std::size_t> train_fold, test_fold;
    std::size_t total_windows = 0;          // before any split or subsampling
    std::size_t unseen_sensors = 0;         // test events with sensors missing from the vocabulary
    SensorVocab vocab;
    NormStats norm;                         // sequence normalization, empty if unused

    std::vector<std::string> classes() const {
        std::vector<std::string> all;
        for (const auto& w : train) all.push_back(w.label);
        for (const auto& w : test) all.push_back(w.label);
        return sorted_classes(all);
    }
};

namespace detail {

inline std::vector<std::string> labels_of(std::span<const SensorWindow> ws) {
    std::vector<std::string> out;
    out.reserve(ws.size());
    for (const auto& w : ws) out.push_back(w.label);
    return out;
}

inline void normalize_handcrafted(Dataset& d, const std::vector<Vector>& tr, const std::vector<Vector>& te) {
    d.hand_train = stack_rows(tr);
    d.hand_test = stack_rows(te);
    if (tr.empty()) return;
    const NormStats s = fit_normalize(d.hand_train);
    d.hand_train = apply_normalize(d.hand_train, s);
    if (!te.empty()) d.hand_test = apply_normalize(d.hand_test, s);
}

inline Dataset load_synthetic(const ExperimentConfig& cfg) {
    const auto& dc = cfg.dataset;
    const std::uint64_t seed = cfg.trainer.seed;
    Dataset d;
    d.kind = DatasetKind::synthetic;
    d.train = make_sinusoid_windows({dc.per_class, dc.steps, sub_seed(seed, 10), dc.phase_spread});
    d.test = make_sinusoid_windows({dc.per_class, dc.steps, sub_seed(seed, 11), dc.phase_spread});
    for (auto& w : d.test) w.id += d.train.size();
    d.total_windows = d.train.size() + d.test.size();
    return d;
}

inline Dataset load_har_dataset(const ExperimentConfig& cfg) {
    const auto& dc = cfg.dataset;
    if (dc.path.empty()) throw usage_error("dataset.path is required for HAR");
    HarData h = load_har(dc.path);
    Dataset d;
    d.kind = DatasetKind::har;
    d.total_windows = h.train.size() + h.test.size();
    if (dc.max_train > 0) {
        Rng rng(sub_seed(cfg.trainer.seed, 12));
        h.train = stratified_subsample(h.train, dc.max_train, rng);
    }
    if (dc.max_test > 0) {
        Rng rng(sub_seed(cfg.trainer.seed, 13));
        h.test = stratified_subsample(h.test, dc.max_test, rng);
    }
    d.train = std::move(h.train);
    d.test = std::move(h.test);
    return d;
}

inline Dataset load_casas_dataset(const ExperimentConfig& cfg, const ModelFile* model, bool allow_unsplit) {
    const auto& dc = cfg.dataset;
    if (dc.path.empty()) throw usage_error("dataset.path is required for CASAS");
    const auto events = read_casas(fs::path(dc.path));
    const auto windows = window_events(events, dc.k, dc.stride);

    Dataset d;
    d.kind = DatasetKind::casas;
    d.total_windows = windows.size();

    std::vector<SensorWindow> stamps(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        stamps[i].id = windows[i].id;
        stamps[i].start = windows[i].start();
        stamps[i].end = windows[i].end();
    }
    std::vector<int> fold_of(windows.size(), -1);
    std::vector<bool> is_test(windows.size(), false);
    bool split = true;
    try {
        if (windows.empty()) throw data_error("no windows: the log has fewer than k events");
        const auto folds = split_hh101(stamps);
        d.n_folds = folds.size();
        for (std::size_t f = 0; f < folds.size(); ++f) {
            for (auto i : folds[f].train) fold_of[i] = static_cast<int>(f);
            for (auto i : folds[f].test) {
                fold_of[i] = static_cast<int>(f);
                is_test[i] = true;
            }
        }
    } catch (const Error& e) {
        if (!allow_unsplit || e.kind() != ErrorKind::data) throw;
        split = false;
    }

    std::vector<EventWindow> tr, te;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (split && fold_of[i] < 0) continue;  // trailing partial block
        if (split && is_test[i]) {
            te.push_back(windows[i]);
            d.test_fold.push_back(static_cast<std::size_t>(fold_of[i]));
        } else {
            tr.push_back(windows[i]);
            d.train_fold.push_back(split ? static_cast<std::size_t>(fold_of[i]) : 0);
        }
    }
    if (!split) d.train_fold.clear();

    d.vocab = model ? model->vocab : build_vocab(tr);
    std::vector<Vector> htr, hte;
    for (const auto& w : tr) {
        d.train.push_back(to_sensor_window(w, d.vocab));
        htr.push_back(handcrafted_casas(w, d.vocab));
    }
    for (const auto& w : te) {
        d.test.push_back(to_sensor_window(w, d.vocab, &d.unseen_sensors));
        hte.push_back(handcrafted_casas(w, d.vocab));
    }
    d.hand_names = handcrafted_casas_names(d.vocab);
    normalize_handcrafted(d, htr, hte);
    return d;
}

}  // namespace detail

// Windows, splits and features for the configured dataset. All statistics
// (vocabulary, normalization) are fit on the training side only; when a model
// file is given its stored vocabulary and normalization are reused instead.
// allow_unsplit lets CASAS logs shorter than one 6-day block through (every
// window lands in train) for inspection by `ingest`.
inline Dataset load_dataset(const ExperimentConfig& cfg, const ModelFile* model = nullptr,
                            bool allow_unsplit = false) {
    if (model && model->dataset != cfg.dataset.kind)
        throw usage_error("model was trained on " + to_string(model->dataset) + " data, config says " +
                          to_string(cfg.dataset.kind));
    Dataset d;
    switch (cfg.dataset.kind) {
        case DatasetKind::synthetic: d = detail::load_synthetic(cfg); break;
        case DatasetKind::har: d = detail::load_har_dataset(cfg); break;
        case DatasetKind::casas: return detail::load_casas_dataset(cfg, model, allow_unsplit);
    }
    // Sequence and handcrafted features for the dense (HAR-like) sources.
    std::vector<Vector> htr, hte;
    for (const auto& w : d.train) htr.push_back(handcrafted_har(w));
    for (const auto& w : d.test) hte.push_back(handcrafted_har(w));
    const std::size_t C = d.train.empty() ? (d.test.empty() ? 0 : d.test.front().data.cols())
                                          : d.train.front().data.cols();
    d.hand_names = handcrafted_har_names(C);
    detail::normalize_handcrafted(d, htr, hte);
    if (d.kind == DatasetKind::har) {
        if (model) d.norm = model->norm;
        else if (!d.train.empty()) d.norm = fit_normalize(d.train);
        if (d.norm.size() > 0) {
            apply_normalize(d.train, d.norm);
            apply_normalize(d.test, d.norm);
        }
    }
    return d;
}

// ---------------------------------------------------------------- outputs

namespace detail {

inline std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw data_error("cannot write " + p.string());
    return os;
}

inline void seed_line(std::ostream& os, std::uint64_t seed) { os << "# seed=" << seed << '\n'; }

inline std::string slug(const std::string& label) {
    std::string s;
    for (unsigned char c : label) s += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
    return s;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

inline void write_embeddings(const fs::path& p, const EmbeddingSet& e, std::uint64_t seed) {
    auto os = open_out(p);
    seed_line(os, seed);
    os << "id,label";
    for (std::size_t k = 0; k < e.z.cols(); ++k) os << ",z" << k;
    os << '\n';
    for (std::size_t i = 0; i < e.size(); ++i) {
        os << e.ids[i] << ',' << csv_field(e.labels[i]);
        for (double v : e.z.row(i)) os << ',' << format_double(v);
        os << '\n';
    }
}

inline void write_report_files(const fs::path& dir, const std::string& stem, const EvalReport& r,
                               std::uint64_t seed, std::ostream& out) {
    {
        auto os = open_out(dir / (stem + ".csv"));
        seed_line(os, seed);
        write_report_csv(os, r);
    }
    std::ostringstream table;
    write_report_table(table, r);
    auto os = open_out(dir / (stem + ".txt"));
    os << "seed=" << seed << '\n' << table.str();
    out << table.str();
}

}  // namespace detail

// ---------------------------------------------------------------- evaluation

// Random forest fit on training features, scored on test features. With CASAS
// folds each fold gets its own forest; predictions are pooled across folds
// before scoring unless fold_average asks for per-fold scores averaged.
inline EvalReport evaluate_split(const std::string& feature_set, const Matrix& Xtr,
                                 const std::vector<std::string>& ytr, const Matrix& Xte,
                                 const std::vector<std::string>& yte, const Dataset& d,
                                 const ExperimentConfig& cfg) {
    const auto classes = d.classes();
    const std::uint64_t seed = cfg.trainer.seed;
    if (Xte.rows() == 0) throw data_error("no test windows to evaluate");
    if (d.n_folds == 0)
        return evaluate_features(feature_set, Xtr, ytr, Xte, yte, classes, cfg.eval.n_trees, forest_seed(seed));

    std::vector<std::string> pred(yte.size());
    std::vector<F1Result> per_fold;
    for (std::size_t f = 0; f < d.n_folds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < d.train_fold.size(); ++i)
            if (d.train_fold[i] == f) tr.push_back(i);
        for (std::size_t i = 0; i < d.test_fold.size(); ++i)
            if (d.test_fold[i] == f) te.push_back(i);
        if (te.empty()) continue;
        if (tr.empty()) throw data_error("fold " + std::to_string(f) + " has test days but no training windows");
        Matrix A(tr.size(), Xtr.cols()), B(te.size(), Xte.cols());
        std::vector<std::string> ya, yb;
        for (std::size_t r = 0; r < tr.size(); ++r) {
            std::copy(Xtr.row(tr[r]).begin(), Xtr.row(tr[r]).end(), A.row(r).begin());
            ya.push_back(ytr[tr[r]]);
        }
        for (std::size_t r = 0; r < te.size(); ++r) {
            std::copy(Xte.row(te[r]).begin(), Xte.row(te[r]).end(), B.row(r).begin());
            yb.push_back(yte[te[r]]);
        }
        const Forest forest = train_forest(A, ya, cfg.eval.n_trees, forest_seed(seed, f));
        const auto p = forest_predict_all(forest, B);
        for (std::size_t r = 0; r < te.size(); ++r) pred[te[r]] = p[r];
        per_fold.push_back(f1_per_class(yb, p, classes));
    }

    EvalReport r = make_report(feature_set, yte, pred, classes, Xte, yte);
    if (cfg.eval.fold_average && !per_fold.empty()) {
        auto& s = r.scores;
        const double n = static_cast<double>(per_fold.size());
        for (std::size_t c = 0; c < classes.size(); ++c) {
            s.precision[c] = s.recall[c] = s.f1[c] = 0.0;
            for (const auto& pf : per_fold) {
                s.precision[c] += pf.precision[c] / n;
                s.recall[c] += pf.recall[c] / n;
                s.f1[c] += pf.f1[c] / n;
            }
        }
        s.macro_f1 = std::accumulate(s.f1.begin(), s.f1.end(), 0.0) / static_cast<double>(classes.size());
    }
    return r;
}

struct FeatureMatrices {
    Matrix train, test;
};

inline FeatureMatrices features_for(const std::string& set, const Dataset& d, const ModelFile* model) {
    if (set == "raw") return {flatten_windows(d.train), flatten_windows(d.test)};
    if (set == "handcrafted") return {d.hand_train, d.hand_test};
    if (set == "activity2vec") {
        if (!model) throw usage_error("activity2vec features need a trained model (--model)");
        return {embed_all(d.train, model->model).z, embed_all(d.test, model->model).z};
    }
    throw usage_error("unknown feature set '" + set + "' (raw, handcrafted, activity2vec, all)");
}

inline std::vector<std::string> expand_feature_sets(const std::string& s) {
    if (s == "all") return {"raw", "handcrafted", "activity2vec"};
    return {s};
}

// ---------------------------------------------------------------- commands

struct Options {
    std::string config_path;
    std::optional<std::string> dataset, path, out, mode, output, l1_target, batch, features;
    std::optional<std::size_t> k, stride, epochs, embedding_dim, n_trees, checkpoint_every, max_train,
        max_test, per_class, steps;
    std::optional<double> lr, noise, lambda, phase_spread;
    std::optional<std::uint64_t> seed;
    bool fold_average = false;

    std::string model_path;
    std::vector<std::string> exclude;

    // gradcheck
    std::size_t gc_T = 4, gc_D = 3, gc_H = 2, gc_seeds = 1;
    double gc_lambda = 1e-3, gc_eps = 1e-5;
    std::string gc_mode = "both", gc_output = "linear";
    bool gc_grid = false;
};

inline ExperimentConfig resolve_config(const Options& o) {
    ExperimentConfig c;
    if (const char* env = std::getenv("A2V_SEED"); env && *env) {
        std::uint64_t s = 0;
        if (!a2v::detail::parse_int(std::string_view(env), s))
            throw usage_error(std::string("A2V_SEED must be a non-negative integer, got '") + env + "'");
        c.trainer.seed = s;
    }
    if (!o.config_path.empty()) c = load_config(o.config_path, c);
    auto& d = c.dataset;
    auto& t = c.trainer;
    if (o.dataset) d.kind = parse_dataset_kind(*o.dataset);
    if (o.path) d.path = *o.path;
    if (o.k) d.k = *o.k;
    if (o.stride) d.stride = *o.stride;
    if (o.max_train) d.max_train = *o.max_train;
    if (o.max_test) d.max_test = *o.max_test;
    if (o.per_class) d.per_class = *o.per_class;
    if (o.steps) d.steps = *o.steps;
    if (o.phase_spread) d.phase_spread = *o.phase_spread;
    if (o.embedding_dim) t.embedding_dim = *o.embedding_dim;
    if (o.mode) t.mode = parse_decoder_mode(*o.mode);
    if (o.output) t.output = parse_output_activation(*o.output);
    if (o.epochs) t.epochs = *o.epochs;
    if (o.lr) t.adam.lr = *o.lr;
    if (o.noise) t.noise_std = *o.noise;
    if (o.lambda) t.l1_lambda = *o.lambda;
    if (o.l1_target) t.l1_target = parse_l1_target(*o.l1_target);
    if (o.seed) t.seed = *o.seed;
    if (o.batch) t.batch = parse_batch_mode(*o.batch);
    if (o.checkpoint_every) t.checkpoint_every = *o.checkpoint_every;
    if (o.n_trees) c.eval.n_trees = *o.n_trees;
    if (o.features) c.eval.features = *o.features;
    if (o.fold_average) c.eval.fold_average = true;
    if (o.out) c.output_dir = *o.out;
    if (c.eval.n_trees < 1) throw usage_error("n_trees must be >= 1");
    t.validate();
    return c;
}

namespace detail {

inline fs::path prepare_out(const ExperimentConfig& c) {
    const fs::path dir = c.output_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw data_error("cannot create output directory " + dir.string() + ": " + ec.message());
    auto os = open_out(dir / "config.ini");
    write_config(os, c);
    return dir;
}

inline fs::path model_path(const Options& o, const fs::path& out) {
    return o.model_path.empty() ? out / "model.a2v" : fs::path(o.model_path);
}

inline std::optional<ModelFile> load_model_if_needed(const Options& o, const fs::path& out, bool needed) {
    if (!needed) return std::nullopt;
    const fs::path p = model_path(o, out);
    if (!fs::exists(p)) throw usage_error("model file " + p.string() + " not found; run train first or pass --model");
    return load_model_file(p);
}

inline bool wants_model(const std::string& features) {
    return features == "activity2vec" || features == "all";
}

}  // namespace detail

inline int cmd_ingest(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const Dataset d = load_dataset(c, nullptr, true);
    const fs::path dir = detail::prepare_out(c);

    std::map<std::string, std::size_t> counts;
    {
        auto os = detail::open_out(dir / "windows.csv");
        detail::seed_line(os, c.trainer.seed);
        os << "id,split,label,rows,cols,start,end\n";
        auto emit = [&](const SensorWindow& w, const char* split) {
            ++counts[w.label];
            os << w.id << ',' << split << ',' << detail::csv_field(w.label) << ',' << w.data.rows() << ','
               << w.data.cols() << ',' << (w.start ? format_timestamp(*w.start) : "") << ','
               << (w.end ? format_timestamp(*w.end) : "") << '\n';
        };
        for (const auto& w : d.train) emit(w, "train");
        for (const auto& w : d.test) emit(w, "test");
    }
    {
        auto os = detail::open_out(dir / "features.csv");
        detail::seed_line(os, c.trainer.seed);
        os << "id,split,label";
        for (const auto& n : d.hand_names) os << ',' << n;
        os << '\n';
        auto emit = [&](const std::vector<SensorWindow>& ws, const Matrix& X, const char* split) {
            for (std::size_t i = 0; i < ws.size(); ++i) {
                os << ws[i].id << ',' << split << ',' << detail::csv_field(ws[i].label);
                for (double v : X.row(i)) os << ',' << format_double(v);
                os << '\n';
            }
        };
        emit(d.train, d.hand_train, "train");
        emit(d.test, d.hand_test, "test");
    }

    out << d.train.size() + d.test.size() << " windows\n";
    out << "train " << d.train.size() << ", test " << d.test.size();
    if (d.kind == DatasetKind::casas) {
        out << ", folds " << d.n_folds << ", vocabulary " << d.vocab.size();
        if (d.n_folds == 0) out << " (log spans fewer than 6 days, not split)";
        if (d.total_windows != d.train.size() + d.test.size())
            out << ", " << d.total_windows - d.train.size() - d.test.size() << " windows outside full day blocks";
    }
    out << '\n';
    for (const auto& [label, n] : counts) out << "  " << label << ": " << n << '\n';
    return 0;
}

inline int cmd_train(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const Dataset d = load_dataset(c);
    const fs::path dir = detail::prepare_out(c);

    auto wrap = [&](const Seq2SeqModel& m) {
        ModelFile f;
        f.seed = c.trainer.seed;
        f.dataset = d.kind;
        f.vocab = d.vocab;
        f.norm = d.norm;
        f.model = m;
        return f;
    };
    const TrainResult r = train(d.train, c.trainer, [&](std::size_t epoch, const Seq2SeqModel& m) {
        save_model_file(dir / ("checkpoint_epoch" + std::to_string(epoch) + ".a2v"), wrap(m));
    });
    save_model_file(detail::model_path(o, dir), wrap(r.model));
    auto os = detail::open_out(dir / "loss.csv");
    detail::seed_line(os, c.trainer.seed);
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < r.loss_history.size(); ++e) os << e + 1 << ',' << format_double(r.loss_history[e]) << '\n';

    out << "trained on " << d.train.size() << " windows, E=" << c.trainer.embedding_dim << ", "
        << c.trainer.epochs << " epochs\n"
        << "loss first=" << format_double(r.loss_history.front())
        << " last=" << format_double(r.loss_history.back()) << '\n';
    return 0;
}

inline int cmd_embed(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const fs::path dir = detail::prepare_out(c);
    const auto model = detail::load_model_if_needed(o, dir, true);
    const Dataset d = load_dataset(c, &*model);
    const EmbeddingSet tr = embed_all(d.train, model->model);
    const EmbeddingSet te = embed_all(d.test, model->model);
    detail::write_embeddings(dir / "embeddings_train.csv", tr, c.trainer.seed);
    detail::write_embeddings(dir / "embeddings_test.csv", te, c.trainer.seed);
    out << "embedded " << tr.size() << " train and " << te.size() << " test windows (E="
        << model->model.embedding_dim() << ")\n";
    return 0;
}

inline int cmd_eval(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const fs::path dir = detail::prepare_out(c);
    const auto model = detail::load_model_if_needed(o, dir, detail::wants_model(c.eval.features));
    const Dataset d = load_dataset(c, model ? &*model : nullptr);
    const auto ytr = detail::labels_of(d.train), yte = detail::labels_of(d.test);
    for (const auto& set : expand_feature_sets(c.eval.features)) {
        const FeatureMatrices X = features_for(set, d, model ? &*model : nullptr);
        const EvalReport r = evaluate_split(set, X.train, ytr, X.test, yte, d, c);
        detail::write_report_files(dir, "report_" + set, r, c.trainer.seed, out);
    }
    return 0;
}

inline int cmd_loco(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const Dataset d = load_dataset(c);
    const fs::path dir = detail::prepare_out(c);
    std::vector<std::string> targets = o.exclude;
    if (targets.empty()) targets = sorted_classes(detail::labels_of(d.train));
    const auto yte = detail::labels_of(d.test);

    auto summary = detail::open_out(dir / "loco_summary.csv");
    detail::seed_line(summary, c.trainer.seed);
    summary << "excluded,class,F1\n";
    for (const auto& excluded : targets) {
        std::vector<SensorWindow> kept;
        for (std::size_t i = 0; i < d.train.size(); ++i)
            if (d.train[i].label != excluded) kept.push_back(d.train[i]);
        if (kept.size() == d.train.size() &&
            std::none_of(yte.begin(), yte.end(), [&](const auto& y) { return y == excluded; }))
            throw usage_error("class '" + excluded + "' does not occur in the dataset");
        if (kept.empty()) throw data_error("excluding '" + excluded + "' leaves no training windows");

        const TrainResult t = train(kept, c.trainer);
        const EmbeddingSet etr = embed_all(d.train, t.model), ete = embed_all(d.test, t.model);
        const EvalReport r = evaluate_split("activity2vec", etr.z, etr.labels, ete.z, ete.labels, d, c);
        out << "excluded: " << excluded << " (autoencoder saw " << kept.size() << " windows)\n";
        detail::write_report_files(dir, "loco_" + detail::slug(excluded), r, c.trainer.seed, out);
        for (std::size_t k = 0; k < r.scores.classes.size(); ++k)
            summary << detail::csv_field(excluded) << ',' << detail::csv_field(r.scores.classes[k]) << ','
                    << fmt_fixed(r.scores.f1[k], 6) << '\n';
    }
    return 0;
}

inline int cmd_project(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const fs::path dir = detail::prepare_out(c);
    const auto model = detail::load_model_if_needed(o, dir, detail::wants_model(c.eval.features));
    const Dataset d = load_dataset(c, model ? &*model : nullptr);
    for (const auto& set : expand_feature_sets(c.eval.features)) {
        const FeatureMatrices X = features_for(set, d, model ? &*model : nullptr);
        const Matrix P = pca_project(X.train, 2);
        auto os = detail::open_out(dir / ("projection_" + set + ".csv"));
        detail::seed_line(os, c.trainer.seed);
        os << "id,label,x,y\n";
        for (std::size_t i = 0; i < d.train.size(); ++i)
            os << d.train[i].id << ',' << detail::csv_field(d.train[i].label) << ',' << format_double(P(i, 0))
               << ',' << format_double(P(i, 1)) << '\n';
        out << "projected " << d.train.size() << " training windows (" << set << ")\n";
    }
    return 0;
}

inline int cmd_gradcheck(const Options& o, std::ostream& out) {
    std::vector<DecoderMode> modes;
    if (o.gc_mode == "both") modes = {DecoderMode::paper_literal, DecoderMode::repeat_input};
    else modes = {parse_decoder_mode(o.gc_mode)};
    const OutputActivation act = parse_output_activation(o.gc_output);
    std::uint64_t seed = o.seed.value_or(0);
    if (!o.seed)
        if (const char* env = std::getenv("A2V_SEED"); env && *env)
            if (!a2v::detail::parse_int(std::string_view(env), seed))
                throw usage_error(std::string("A2V_SEED must be a non-negative integer, got '") + env + "'");
    if (o.gc_seeds < 1) throw usage_error("--seeds must be >= 1");

    std::vector<std::size_t> Ts{o.gc_T}, Ds{o.gc_D}, Hs{o.gc_H};
    std::vector<double> lambdas{o.gc_lambda};
    if (o.gc_grid) {
        Ts = {1, 4, 8};
        Ds = {1, 3};
        Hs = {2, 4};
        lambdas = {0.0, 1e-3};
    }
    double worst = 0.0;
    std::size_t runs = 0;
    for (std::uint64_t s = seed; s < seed + o.gc_seeds; ++s)
        for (auto T : Ts)
            for (auto D : Ds)
                for (auto H : Hs)
                    for (auto mode : modes)
                        for (double lam : lambdas) {
                            const auto r = check_model_gradients(T, D, H, mode, act, lam, s, o.gc_eps);
                            ++runs;
                            worst = std::max(worst, r.max_rel_error);
                            if (!o.gc_grid || r.max_rel_error > kGradTolerance)
                                out << "T=" << T << " D=" << D << " H=" << H << " mode=" << to_string(mode)
                                    << " output=" << to_string(act) << " lambda=" << lam << " seed=" << s
                                    << " max_rel_error=" << r.max_rel_error << " worst_block=" << r.worst_block
                                    << '\n';
                        }
    const bool ok = worst <= kGradTolerance;
    out << "gradcheck " << (ok ? "ok" : "FAILED") << " runs=" << runs << " max_rel_error=" << worst
        << " tolerance=" << kGradTolerance << '\n';
    if (!ok) throw numeric_error("gradient check failed: max relative error " + std::to_string(worst));
    return 0;
}

// ---------------------------------------------------------------- entry point

namespace detail {

inline void add_common(CLI::App* sub, Options& o) {
    sub->add_option("-c,--config", o.config_path, "Experiment config file");
    sub->add_option("--dataset", o.dataset, "synthetic | har | casas");
    sub->add_option("--path", o.path, "Dataset file (CASAS) or directory (HAR)");
    sub->add_option("-o,--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Master seed (default: A2V_SEED or 0)");
    sub->add_option("--k", o.k, "CASAS events per window");
    sub->add_option("--stride", o.stride, "CASAS window stride");
    sub->add_option("--max-train", o.max_train, "Stratified cap on training windows (0 = all)");
    sub->add_option("--max-test", o.max_test, "Stratified cap on test windows (0 = all)");
    sub->add_option("--per-class", o.per_class, "Synthetic windows per class");
    sub->add_option("--steps", o.steps, "Synthetic sequence length");
    sub->add_option("--phase-spread", o.phase_spread, "Synthetic phase range in radians");
}

inline void add_model_options(CLI::App* sub, Options& o) {
    sub->add_option("--embedding-dim", o.embedding_dim, "Embedding size E (even)");
    sub->add_option("--mode", o.mode, "Decoder mode: paper-literal | repeat-input");
    sub->add_option("--output-activation", o.output, "linear | softmax");
    sub->add_option("--epochs", o.epochs, "Training epochs");
    sub->add_option("--lr", o.lr, "Adam learning rate");
    sub->add_option("--noise", o.noise, "Input corruption std");
    sub->add_option("--lambda", o.lambda, "L1 weight");
    sub->add_option("--l1-target", o.l1_target, "activation | weights");
    sub->add_option("--batch", o.batch, "per-window | full-batch");
    sub->add_option("--checkpoint-every", o.checkpoint_every, "Save a model every N epochs (0 = never)");
}

inline void add_eval_options(CLI::App* sub, Options& o) {
    sub->add_option("--n-trees", o.n_trees, "Random forest size");
    sub->add_flag("--fold-average", o.fold_average, "CASAS: average per-fold F1 instead of pooling");
}

inline std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

inline const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::data: return "data";
        case ErrorKind::numeric: return "numeric";
    }
    return "error";
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Options o;
    CLI::App app{"activity2vec: sequence autoencoder embeddings for activity recognition", "a2v"};
    app.require_subcommand(1, 1);

    auto* ingest = app.add_subcommand("ingest", "Window a dataset and write window and feature tables");
    detail::add_common(ingest, o);

    auto* trn = app.add_subcommand("train", "Train the autoencoder; writes model.a2v and loss.csv");
    detail::add_common(trn, o);
    detail::add_model_options(trn, o);
    trn->add_option("--model", o.model_path, "Model file to write (default <out>/model.a2v)");

    auto* emb = app.add_subcommand("embed", "Encode train and test windows with a trained model");
    detail::add_common(emb, o);
    emb->add_option("--model", o.model_path, "Model file (default <out>/model.a2v)");

    auto* ev = app.add_subcommand("eval", "Random forest F1 and intra-class distance report");
    detail::add_common(ev, o);
    detail::add_eval_options(ev, o);
    ev->add_option("--features", o.features, "raw | handcrafted | activity2vec | all");
    ev->add_option("--model", o.model_path, "Model file for activity2vec features");

    auto* loco = app.add_subcommand("loco", "Leave-one-class-out: retrain without each class and evaluate");
    detail::add_common(loco, o);
    detail::add_model_options(loco, o);
    detail::add_eval_options(loco, o);
    loco->add_option("--exclude", o.exclude, "Class to leave out (repeatable; default every class)");

    auto* proj = app.add_subcommand("project", "2-D PCA coordinates of the training features");
    detail::add_common(proj, o);
    proj->add_option("--features", o.features, "raw | handcrafted | activity2vec | all");
    proj->add_option("--model", o.model_path, "Model file for activity2vec features");

    auto* gc = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients on a random instance");
    gc->add_option("--T", o.gc_T, "Sequence length")->capture_default_str();
    gc->add_option("--D", o.gc_D, "Input channels")->capture_default_str();
    gc->add_option("--H", o.gc_H, "Encoder hidden size per direction")->capture_default_str();
    gc->add_option("--seed", o.seed, "First seed (default: A2V_SEED or 0)");
    gc->add_option("--seeds", o.gc_seeds, "Number of consecutive seeds")->capture_default_str();
    gc->add_option("--lambda", o.gc_lambda, "L1 weight on z")->capture_default_str();
    gc->add_option("--eps", o.gc_eps, "Finite-difference step")->capture_default_str();
    gc->add_option("--mode", o.gc_mode, "paper-literal | repeat-input | both")->capture_default_str();
    gc->add_option("--output-activation", o.gc_output, "linear | softmax")->capture_default_str();
    gc->add_flag("--grid", o.gc_grid, "Sweep T{1,4,8} x D{1,3} x H{2,4} x lambda{0,1e-3}");

    std::vector<char*> argv;
    std::string prog = "a2v";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }

    try {
        if (ingest->parsed()) return cmd_ingest(o, out);
        if (trn->parsed()) return cmd_train(o, out);
        if (emb->parsed()) return cmd_embed(o, out);
        if (ev->parsed()) return cmd_eval(o, out);
        if (loco->parsed()) return cmd_loco(o, out);
        if (proj->parsed()) return cmd_project(o, out);
        if (gc->parsed()) return cmd_gradcheck(o, out);
    } catch (const Error& e) {
        err << "error[" << detail::kind_name(e.kind()) << "]: " << detail::one_line(e.what()) << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error[data]: " << detail::one_line(e.what()) << '\n';
        return static_cast<int>(ErrorKind::data);
    }
    return static_cast<int>(ErrorKind::usage);
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace a2v::cli
