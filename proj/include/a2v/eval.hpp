#pragma once

// Embedding-quality evaluation: a CART/Gini random forest, per-class F1,
// intra-class mean pairwise distance, the leave-one-class-out protocol and a
// PCA projection for plotting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "a2v/ndcore.hpp"
#include "a2v/trainer.hpp"
#include "a2v/window.hpp"

namespace a2v {

// Sorted distinct labels; index order doubles as the lexicographic tie-break.
inline std::vector<std::string> sorted_classes(std::span<const std::string> labels) {
    std::set<std::string> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0, right = 0;
    std::vector<std::uint32_t> counts;  // class histogram of training samples reaching the node

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    std::size_t leaf_class(std::span<const double> x) const {
        std::uint32_t n = 0;
        while (!nodes[n].is_leaf())
            n = x[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold ? nodes[n].left
                                                                                      : nodes[n].right;
        const auto& c = nodes[n].counts;
        return static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
    }

    friend bool operator==(const DecisionTree& a, const DecisionTree& b) {
        if (a.nodes.size() != b.nodes.size()) return false;
        for (std::size_t i = 0; i < a.nodes.size(); ++i) {
            const auto &x = a.nodes[i], &y = b.nodes[i];
            if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
                x.right != y.right || x.counts != y.counts)
                return false;
        }
        return true;
    }
};

struct Forest {
    std::vector<std::string> classes;
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    std::size_t max_features = 0;
    std::uint64_t seed = 0;

    std::size_t n_trees() const { return trees.size(); }
    friend bool operator==(const Forest&, const Forest&) = default;
};

inline std::size_t sqrt_features(std::size_t F) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(F)))));
}

namespace detail {

inline double gini(std::span<const std::uint32_t> counts, double n) {
    if (n <= 0.0) return 0.0;
    double s = 0.0;
    for (auto c : counts) {
        const double p = c / n;
        s += p * p;
    }
    return 1.0 - s;
}

// CART grown until nodes are pure or hold fewer than two samples. Each node
// scans features in random order until `mtry` non-constant ones were tried.
inline DecisionTree grow_tree(const Matrix& X, std::span<const std::size_t> y, std::size_t n_classes,
                              std::vector<std::size_t> samples, std::size_t mtry, Rng& rng) {
    const std::size_t F = X.cols();
    DecisionTree tree;
    struct Pending {
        std::uint32_t node;
        std::vector<std::size_t> samples;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(samples)});

    std::vector<std::size_t> features(F);
    std::vector<std::pair<double, std::size_t>> column;
    std::vector<std::uint32_t> left(n_classes), right(n_classes);

    while (!stack.empty()) {
        Pending cur = std::move(stack.back());
        stack.pop_back();
        auto& counts = tree.nodes[cur.node].counts;
        counts.assign(n_classes, 0);
        for (std::size_t s : cur.samples) ++counts[y[s]];
        const std::size_t n = cur.samples.size();
        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
        if (pure || n < 2) continue;

        std::iota(features.begin(), features.end(), 0);
        rng.shuffle(features);
        const double nd = static_cast<double>(n);
        double best_score = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        std::size_t tried = 0;
        for (std::size_t f : features) {
            if (tried >= mtry) break;
            column.clear();
            for (std::size_t s : cur.samples) column.emplace_back(X(s, f), y[s]);
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;  // constant here
            ++tried;
            std::fill(left.begin(), left.end(), 0);
            right = counts;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ++left[column[i].second];
                --right[column[i].second];
                if (column[i].first == column[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1), nr = nd - nl;
                const double score = nl * gini(left, nl) + nr * gini(right, nr);
                if (score < best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    const double a = column[i].first, b = column[i + 1].first;
                    double mid = a + (b - a) / 2.0;
                    if (!(mid < b)) mid = a;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) continue;  // every feature constant: leaf

        std::vector<std::size_t> ls, rs;
        for (std::size_t s : cur.samples)
            (X(s, static_cast<std::size_t>(best_feature)) <= best_threshold ? ls : rs).push_back(s);
        const auto li = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[cur.node];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = li;
        node.right = li + 1;
        stack.push_back({li + 1, std::move(rs)});
        stack.push_back({li, std::move(ls)});
    }
    return tree;
}

}  // namespace detail

// Each tree sees a bootstrap of N draws from its own stream derived from
// (seed, tree index); nodes consider ceil(sqrt(F)) features.
inline Forest train_forest(const Matrix& X, std::span<const std::string> labels,
                           std::size_t n_trees = 100, std::uint64_t seed = 0) {
    const std::size_t N = X.rows();
    if (labels.size() != N)
        throw usage_error("train_forest: " + std::to_string(N) + " rows but " +
                          std::to_string(labels.size()) + " labels");
    if (N < 2) throw data_error("train_forest needs at least two samples");
    if (n_trees < 1) throw usage_error("n_trees must be >= 1");
    if (!all_finite(X.values())) throw data_error("train_forest: non-finite feature value");

    Forest forest;
    forest.classes = sorted_classes(labels);
    if (forest.classes.size() < 2) throw data_error("train_forest needs at least two classes");
    forest.n_features = X.cols();
    forest.max_features = sqrt_features(X.cols());
    forest.seed = seed;

    std::vector<std::size_t> y(N);
    for (std::size_t i = 0; i < N; ++i)
        y[i] = static_cast<std::size_t>(std::lower_bound(forest.classes.begin(), forest.classes.end(), labels[i]) -
                                        forest.classes.begin());

    const Rng master(seed);
    forest.trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng = master.derive(t);
        std::vector<std::size_t> boot(N);
        for (auto& b : boot) b = static_cast<std::size_t>(rng.below(N));
        forest.trees.push_back(
            detail::grow_tree(X, y, forest.classes.size(), std::move(boot), forest.max_features, rng));
    }
    return forest;
}

// Majority vote over trees; ties go to the lexicographically smallest class.
inline std::string forest_predict(const Forest& f, std::span<const double> x) {
    if (x.size() != f.n_features)
        throw usage_error("forest_predict: input has " + std::to_string(x.size()) +
                          " features, forest expects " + std::to_string(f.n_features));
    std::vector<std::size_t> votes(f.classes.size(), 0);
    for (const auto& t : f.trees) ++votes[t.leaf_class(x)];
    return f.classes[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
}

inline std::vector<std::string> forest_predict_all(const Forest& f, const Matrix& X) {
    std::vector<std::string> out;
    out.reserve(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out.push_back(forest_predict(f, X.row(i)));
    return out;
}

struct F1Result {
    std::vector<std::string> classes;
    Vector precision, recall, f1;
    std::vector<std::size_t> support;
    std::vector<std::vector<std::size_t>> confusion;  // [true][pred]
    double macro_f1 = 0.0;
};

// One-vs-rest scores over `classes` (default: union of both label lists).
// A zero denominator makes the affected quantity 0.
inline F1Result f1_per_class(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                             std::vector<std::string> classes = {}) {
    if (y_true.size() != y_pred.size())
        throw usage_error("f1_per_class: " + std::to_string(y_true.size()) + " true labels vs " +
                          std::to_string(y_pred.size()) + " predictions");
    if (y_true.empty()) throw usage_error("f1_per_class: empty label vectors");
    if (classes.empty()) {
        std::set<std::string> s(y_true.begin(), y_true.end());
        s.insert(y_pred.begin(), y_pred.end());
        classes.assign(s.begin(), s.end());
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
    const std::size_t C = classes.size();

    F1Result r;
    r.confusion.assign(C, std::vector<std::size_t>(C, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto t = index.find(y_true[i]), p = index.find(y_pred[i]);
        if (t == index.end() || p == index.end())
            throw usage_error("f1_per_class: label outside the class list");
        ++r.confusion[t->second][p->second];
    }
    r.classes = std::move(classes);
    r.precision.assign(C, 0.0);
    r.recall.assign(C, 0.0);
    r.f1.assign(C, 0.0);
    r.support.assign(C, 0);
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t tp = r.confusion[c][c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < C; ++o) {
            if (o == c) continue;
            fp += r.confusion[o][c];
            fn += r.confusion[c][o];
        }
        r.support[c] = tp + fn;
        const double P = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double R = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        r.precision[c] = P;
        r.recall[c] = R;
        // 2PR/(P+R) written on counts: one rounding, exact for hand examples.
        r.f1[c] = tp ? static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn) : 0.0;
    }
    r.macro_f1 = std::accumulate(r.f1.begin(), r.f1.end(), 0.0) / static_cast<double>(C);
    return r;
}

// Mean Euclidean distance over unordered same-class pairs; nullopt for
// classes with fewer than two samples.
inline std::map<std::string, std::optional<double>> intra_class_similarity(
    const Matrix& X, std::span<const std::string> labels) {
    if (X.rows() != labels.size())
        throw usage_error("intra_class_similarity: rows and labels differ in length");
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    std::map<std::string, std::optional<double>> out;
    for (const auto& [label, idx] : members) {
        if (idx.size() < 2) {
            out[label] = std::nullopt;
            continue;
        }
        double total = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a + 1; b < idx.size(); ++b, ++pairs)
                total += euclidean(X.row(idx[a]), X.row(idx[b]));
        out[label] = total / static_cast<double>(pairs);
    }
    return out;
}

struct EvalReport {
    std::string feature_set;  // raw | handcrafted | activity2vec
    F1Result scores;
    std::map<std::string, std::optional<double>> intra;

    std::optional<double> intra_of(const std::string& c) const {
        auto it = intra.find(c);
        return it == intra.end() ? std::nullopt : it->second;
    }
};

inline EvalReport make_report(std::string feature_set, std::span<const std::string> y_true,
                              std::span<const std::string> y_pred, std::vector<std::string> classes,
                              const Matrix& intra_X, std::span<const std::string> intra_labels) {
    EvalReport r{std::move(feature_set), f1_per_class(y_true, y_pred, std::move(classes)), {}};
    if (intra_X.rows() > 0) r.intra = intra_class_similarity(intra_X, intra_labels);
    return r;
}

inline std::string fmt_fixed(double v, int digits = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

inline constexpr std::string_view kUndefined = "undefined";

// class,P,R,F1,intra_class
inline void write_report_csv(std::ostream& os, const EvalReport& r) {
    os << "class,P,R,F1,intra_class\n";
    const auto& s = r.scores;
    for (std::size_t c = 0; c < s.classes.size(); ++c) {
        const auto intra = r.intra_of(s.classes[c]);
        os << s.classes[c] << ',' << fmt_fixed(s.precision[c], 6) << ',' << fmt_fixed(s.recall[c], 6)
           << ',' << fmt_fixed(s.f1[c], 6) << ',' << (intra ? fmt_fixed(*intra, 6) : std::string(kUndefined))
           << '\n';
    }
}

// Classes as columns, one row for F1 and one for intra-class distance.
inline void write_report_table(std::ostream& os, const EvalReport& r) {
    const auto& s = r.scores;
    std::size_t first = std::string("Intra-class").size();
    std::vector<std::size_t> width;
    for (const auto& c : s.classes) width.push_back(std::max<std::size_t>(c.size(), 9));
    auto cell = [&](std::string text, std::size_t w) {
        if (text.size() < w) text.insert(0, w - text.size(), ' ');
        os << "  " << text;
    };
    os << std::string(first, ' ');
    for (std::size_t c = 0; c < s.classes.size(); ++c) cell(s.classes[c], width[c]);
    os << '\n' << std::left << std::setw(static_cast<int>(first)) << "F1" << std::right;
    for (std::size_t c = 0; c < s.classes.size(); ++c) cell(fmt_fixed(s.f1[c], 2), width[c]);
    os << '\n' << "Intra-class";
    for (std::size_t c = 0; c < s.classes.size(); ++c) {
        const auto v = r.intra_of(s.classes[c]);
        cell(v ? fmt_fixed(*v, 2) : std::string(kUndefined), width[c]);
    }
    os << "\nfeatures: " << r.feature_set << "  macro-F1: " << fmt_fixed(s.macro_f1, 4) << '\n';
}

// Forest on training features, predictions on test features, intra-class
// distances over the test features.
inline EvalReport evaluate_features(std::string feature_set, const Matrix& X_train,
                                    std::span<const std::string> y_train, const Matrix& X_test,
                                    std::span<const std::string> y_test, std::vector<std::string> classes,
                                    std::size_t n_trees, std::uint64_t seed) {
    const Forest f = train_forest(X_train, y_train, n_trees, seed);
    const auto pred = forest_predict_all(f, X_test);
    return make_report(std::move(feature_set), y_test, pred, std::move(classes), X_test, y_test);
}

struct LocoResult {
    std::string excluded;
    EvalReport report;
    std::size_t autoencoder_windows = 0;           // windows the autoencoder saw
    std::vector<std::string> classifier_classes;   // classes the forest was trained on
    std::size_t embedded_windows = 0;              // train + test windows encoded
};

// Trains the autoencoder without `excluded`, then embeds every train and
// test window and fits the forest on all embedded training windows.
inline LocoResult leave_one_class_out(std::span<const SensorWindow> train_windows,
                                      std::span<const SensorWindow> test_windows,
                                      const std::string& excluded, const TrainConfig& cfg,
                                      std::size_t n_trees, std::uint64_t forest_seed) {
    const bool present =
        std::any_of(train_windows.begin(), train_windows.end(), [&](const auto& w) { return w.label == excluded; }) ||
        std::any_of(test_windows.begin(), test_windows.end(), [&](const auto& w) { return w.label == excluded; });
    if (!present) throw usage_error("class '" + excluded + "' does not occur in the dataset");

    std::vector<SensorWindow> kept;
    for (const auto& w : train_windows)
        if (w.label != excluded) kept.push_back(w);
    if (kept.empty()) throw data_error("excluding '" + excluded + "' leaves no training windows");

    const TrainResult trained = train(kept, cfg);
    const EmbeddingSet etrain = embed_all(train_windows, trained.model);
    const EmbeddingSet etest = embed_all(test_windows, trained.model);

    std::vector<std::string> all = etrain.labels;
    all.insert(all.end(), etest.labels.begin(), etest.labels.end());
    LocoResult r;
    r.excluded = excluded;
    r.autoencoder_windows = kept.size();
    r.classifier_classes = sorted_classes(etrain.labels);
    r.embedded_windows = etrain.size() + etest.size();
    r.report = evaluate_features("activity2vec", etrain.z, etrain.labels, etest.z, etest.labels,
                                 sorted_classes(all), n_trees, forest_seed);
    return r;
}

// Mean-centred projection onto the top principal axes; each axis is signed so
// its largest-magnitude loading is positive.
inline Matrix pca_project(const Matrix& X, std::size_t dims = 2) {
    const std::size_t N = X.rows(), F = X.cols();
    if (N < 2) throw usage_error("pca_project needs at least two points");
    if (dims == 0 || dims > F) throw usage_error("pca_project: invalid number of dimensions");
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> data(X.values().data(), static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(F));
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const RowMat centred = data.rowwise() - mean;
    const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(N - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw numeric_error("pca_project: eigen decomposition failed");

    Matrix out(N, dims);
    for (std::size_t k = 0; k < dims; ++k) {
        Eigen::VectorXd axis = eig.eigenvectors().col(static_cast<Eigen::Index>(F - 1 - k));
        Eigen::Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0) axis = -axis;
        const Eigen::VectorXd proj = centred * axis;
        for (std::size_t i = 0; i < N; ++i) out(i, k) = proj(static_cast<Eigen::Index>(i));
    }
    return out;
}

}  // namespace a2v
