// Trains a small autoencoder on synthetic sinusoids and scores the
// embeddings with a random forest.
#include <iostream>
#include <numbers>

#include "a2v/eval.hpp"
#include "a2v/synthetic.hpp"
#include "a2v/trainer.hpp"

int main() {
    using namespace a2v;
    const auto train_set = make_sinusoid_windows({20, 32, 1, std::numbers::pi / 4});
    const auto test_set = make_sinusoid_windows({20, 32, 2, std::numbers::pi / 4});

    TrainConfig cfg;
    cfg.embedding_dim = 8;
    cfg.epochs = 100;
    cfg.adam.lr = 5e-3;
    cfg.l1_lambda = 1.0;
    const TrainResult r = train(train_set, cfg);
    std::cout << "loss " << r.loss_history.front() << " -> " << r.loss_history.back() << "\n";

    const EmbeddingSet tr = embed_all(train_set, r.model);
    const EmbeddingSet te = embed_all(test_set, r.model);
    const EvalReport rep = evaluate_features("activity2vec", tr.z, tr.labels, te.z, te.labels,
                                             sorted_classes(te.labels), 50, 7);
    write_report_table(std::cout, rep);
}
