#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "a2v/cli.hpp"
#include "fixtures.hpp"

using namespace a2v;
using fixtures::TempDir;
using fixtures::slurp;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int rc;
    std::string out, err;
};

CliRun invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int rc = cli::run_cli(std::move(args), out, err);
    return {rc, out.str(), err.str()};
}

std::vector<std::string> synth_args(const std::string& cmd, const fs::path& dir) {
    return {cmd, "--dataset", "synthetic", "--per-class", "4", "--steps", "8", "-o", dir.string(), "--seed", "3"};
}

std::vector<std::string> with(std::vector<std::string> a, std::initializer_list<std::string> more) {
    a.insert(a.end(), more);
    return a;
}

const std::vector<std::string> kTrainFlags{"--epochs", "3", "--embedding-dim", "4", "--n-trees", "10"};

class ScopedEnv {
public:
    ScopedEnv(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
    ~ScopedEnv() { ::unsetenv(name_); }

private:
    const char* name_;
};

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Config, RoundTripsThroughText) {
    ExperimentConfig c;
    c.dataset.kind = DatasetKind::casas;
    c.dataset.path = "/data/hh101.txt";
    c.dataset.k = 20;
    c.dataset.phase_spread = 0.1;
    c.trainer.embedding_dim = 64;
    c.trainer.mode = DecoderMode::repeat_input;
    c.trainer.output = OutputActivation::softmax;
    c.trainer.adam.lr = 3e-3;
    c.trainer.l1_lambda = 1.0 / 3.0;
    c.trainer.l1_target = L1Target::weights;
    c.trainer.seed = 123456789012345ull;
    c.trainer.batch = BatchMode::full_batch;
    c.eval.n_trees = 17;
    c.eval.features = "all";
    c.eval.fold_average = true;
    c.output_dir = "runs/x";
    std::istringstream in(config_to_string(c));
    EXPECT_EQ(parse_config(in), c);
}

TEST(Config, CommentsAndDefaults) {
    std::istringstream in("# top\n[trainer]\n; note\n  epochs = 7  \n");
    const ExperimentConfig c = parse_config(in);
    EXPECT_EQ(c.trainer.epochs, 7u);
    EXPECT_EQ(c.trainer.embedding_dim, 128u);
    EXPECT_EQ(c.eval.n_trees, 100u);
}

TEST(Config, UnknownKeyIsAUsageError) {
    std::istringstream in("[trainer]\nepochz = 3\n");
    try {
        parse_config(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::usage);
        EXPECT_NE(std::string(e.what()).find("epochz"), std::string::npos);
    }
    std::istringstream bad("[trainer]\nepochs = many\n");
    EXPECT_THROW(parse_config(bad), Error);
}

TEST(ModelFile, RoundTripIsBitExact) {
    Rng rng(5);
    ModelFile f;
    f.seed = 99;
    f.dataset = DatasetKind::casas;
    f.vocab.sensors = {"D001", "M001", "T101"};
    f.vocab.statuses = {{"D", {"CLOSE", "OPEN"}}, {"M", {"OFF", "ON"}}, {"T", {"21.5"}}};
    f.norm = {{0.1, -2.5, 1e-300}, {1.0, 3.0, 1.0}, {false, false, true}};
    f.model = Seq2SeqModel::random(3, 4, DecoderMode::repeat_input, OutputActivation::softmax, rng);
    f.model.w_out(0, 0) = 0.1 + 0.2;
    std::stringstream ss;
    write_model_file(ss, f);
    const std::string text = ss.str();
    const ModelFile g = read_model_file(ss);
    EXPECT_EQ(g.model, f.model);
    EXPECT_EQ(g.vocab, f.vocab);
    EXPECT_EQ(g.norm, f.norm);
    EXPECT_EQ(g.seed, 99u);
    EXPECT_EQ(g.dataset, DatasetKind::casas);
    std::ostringstream again;
    write_model_file(again, g);
    EXPECT_EQ(again.str(), text);
}

TEST(ModelFile, OtherSchemaVersionIsRejected) {
    Rng rng(6);
    ModelFile f;
    f.model = Seq2SeqModel::random(1, 2, DecoderMode::paper_literal, OutputActivation::linear, rng);
    std::ostringstream os;
    write_model_file(os, f);
    std::string text = os.str();
    const auto at = text.find("schema_version 1");
    ASSERT_NE(at, std::string::npos);
    text.replace(at, 16, "schema_version 2");
    std::istringstream in(text);
    try {
        read_model_file(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::data);
    }
    std::istringstream truncated(os.str().substr(0, os.str().size() / 2));
    EXPECT_THROW(read_model_file(truncated), Error);
}

TEST(Cli, IngestCasasFixture) {
    TempDir dir("ingest");
    const CliRun r = invoke({"ingest", "--dataset", "casas", "--path", (fixtures::data_dir() / "casas_45.txt").string(),
                       "-o", dir.path().string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(first_line(r.out), "2 windows");
    const std::string windows = slurp(dir / "windows.csv");
    EXPECT_EQ(windows.rfind("# seed=0\nid,split,label,rows,cols,start,end\n", 0), 0u);
    EXPECT_TRUE(fs::exists(dir / "features.csv"));
    EXPECT_TRUE(fs::exists(dir / "config.ini"));
}

TEST(Cli, MalformedHarDirectoryNamesTheFile) {
    TempDir dir("har_bad");
    fixtures::write_har(dir / "har", 6, 6);
    fs::remove(dir / "har" / "test" / "Inertial Signals" / "body_gyro_y_test.txt");
    const CliRun r = invoke({"ingest", "--dataset", "har", "--path", (dir / "har").string(), "-o", (dir / "o").string()});
    EXPECT_EQ(r.rc, 2);
    EXPECT_EQ(r.err.rfind("error[data]: ", 0), 0u);
    EXPECT_NE(r.err.find("body_gyro_y_test.txt"), std::string::npos);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, HarIngestCounts) {
    TempDir dir("har_ok");
    fixtures::write_har(dir / "har", 12, 6);
    const CliRun r = invoke({"ingest", "--dataset", "har", "--path", (dir / "har").string(), "-o", (dir / "o").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(first_line(r.out), "18 windows");
}

TEST(Cli, SyntheticPipelineIsByteIdentical) {
    TempDir a("pipe_a"), b("pipe_b");
    for (const TempDir* d : {&a, &b}) {
        for (const std::string cmd : {"train", "embed", "eval", "project"}) {
            auto args = synth_args(cmd, d->path());
            if (cmd == "train") args.insert(args.end(), kTrainFlags.begin(), kTrainFlags.begin() + 4);
            if (cmd == "eval") args = with(args, {"--features", "all", "--n-trees", "10"});
            if (cmd == "project") args = with(args, {"--features", "all"});
            const CliRun r = invoke(args);
            ASSERT_EQ(r.rc, 0) << cmd << ": " << r.err;
        }
    }
    for (const std::string f : {"model.a2v", "loss.csv", "embeddings_train.csv", "embeddings_test.csv",
                                "report_raw.csv", "report_handcrafted.csv", "report_activity2vec.csv",
                                "report_activity2vec.txt", "projection_activity2vec.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_EQ(first_line(slurp(a / "loss.csv")), "# seed=3");
    EXPECT_EQ(first_line(slurp(a / "report_raw.txt")), "seed=3");
}

TEST(Cli, ConfigFileWithSeedOverrideIsReproducible) {
    TempDir dir("cfg");
    fixtures::write_text(dir / "exp.ini",
                         "[dataset]\nkind = synthetic\nper_class = 3\nsteps = 6\n"
                         "[model]\nembedding_dim = 4\n[trainer]\nepochs = 2\nseed = 1\n");
    std::string models[2];
    for (int i = 0; i < 2; ++i) {
        const fs::path out = dir / ("run" + std::to_string(i));
        const CliRun r = invoke({"train", "--config", (dir / "exp.ini").string(), "--seed", "7", "-o", out.string()});
        ASSERT_EQ(r.rc, 0) << r.err;
        models[i] = slurp(out / "model.a2v");
        const ExperimentConfig used = load_config(out / "config.ini");
        EXPECT_EQ(used.trainer.seed, 7u);
        EXPECT_EQ(used.trainer.epochs, 2u);
    }
    EXPECT_EQ(models[0], models[1]);
    EXPECT_NE(models[0].find("seed 7"), std::string::npos);
}

TEST(Cli, ReportsShareClassOrderAcrossFeatureSets) {
    TempDir dir("order");
    ASSERT_EQ(invoke(with(synth_args("train", dir.path()), {"--epochs", "2", "--embedding-dim", "4"})).rc, 0);
    ASSERT_EQ(invoke(with(synth_args("eval", dir.path()), {"--features", "all", "--n-trees", "5"})).rc, 0);
    auto classes = [&](const std::string& set) {
        std::istringstream in(slurp(dir / ("report_" + set + ".csv")));
        std::vector<std::string> out;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#' && line.rfind("class,", 0) != 0) out.push_back(line.substr(0, line.find(',')));
        return out;
    };
    const auto a2v = classes("activity2vec");
    EXPECT_EQ(a2v, (std::vector<std::string>{"fast", "medium", "slow"}));
    EXPECT_EQ(classes("handcrafted"), a2v);
    EXPECT_EQ(classes("raw"), a2v);
}

TEST(Cli, LocoWritesOneReportPerClass) {
    TempDir dir("loco");
    const CliRun r = invoke(with(synth_args("loco", dir.path()), {"--epochs", "2", "--embedding-dim", "4", "--n-trees", "5",
                                                            "--exclude", "slow"}));
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "loco_slow.csv"));
    const std::string summary = slurp(dir / "loco_summary.csv");
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 5);
    EXPECT_EQ(invoke(with(synth_args("loco", dir.path()), {"--exclude", "nonexistent"})).rc, 1);
}

TEST(Cli, GradcheckSucceeds) {
    const CliRun r = invoke({"gradcheck", "--T", "4", "--D", "3", "--H", "2", "--seed", "1"});
    EXPECT_EQ(r.rc, 0) << r.err;
    EXPECT_NE(r.out.find("gradcheck ok"), std::string::npos);
}

TEST(Cli, ExitCodesByErrorKind) {
    EXPECT_EQ(invoke({}).rc, 1);
    EXPECT_EQ(invoke({"train", "--no-such-flag"}).rc, 1);
    EXPECT_EQ(invoke({"ingest", "--dataset", "mnist"}).rc, 1);
    TempDir dir("codes");
    const CliRun missing = invoke({"ingest", "--dataset", "casas", "--path", (dir / "absent.txt").string(), "-o",
                             (dir / "o").string()});
    EXPECT_EQ(missing.rc, 2);
    EXPECT_EQ(missing.err.rfind("error[data]: ", 0), 0u);
    // A huge finite-difference step cannot meet the gradient tolerance.
    const CliRun coarse = invoke({"gradcheck", "--eps", "0.5", "--output-activation", "softmax"});
    EXPECT_EQ(coarse.rc, 3);
    EXPECT_EQ(coarse.err.rfind("error[numeric]: ", 0), 0u);
    EXPECT_EQ(invoke({"embed", "-o", (dir / "empty").string()}).rc, 1);
}

TEST(Cli, SeedFromEnvironmentUnlessFlagGiven) {
    TempDir dir("env");
    const std::string fixture = (fixtures::data_dir() / "casas_45.txt").string();
    {
        ScopedEnv env("A2V_SEED", "42");
        ASSERT_EQ(invoke({"ingest", "--dataset", "casas", "--path", fixture, "-o", (dir / "a").string()}).rc, 0);
        EXPECT_EQ(first_line(slurp(dir / "a" / "windows.csv")), "# seed=42");
        ASSERT_EQ(invoke({"ingest", "--dataset", "casas", "--path", fixture, "-o", (dir / "b").string(), "--seed", "5"}).rc,
                  0);
        EXPECT_EQ(first_line(slurp(dir / "b" / "windows.csv")), "# seed=5");
    }
    {
        ScopedEnv env("A2V_SEED", "banana");
        EXPECT_EQ(invoke({"ingest", "--dataset", "casas", "--path", fixture, "-o", (dir / "c").string()}).rc, 1);
    }
}

TEST(Cli, CheckpointsAreWritten) {
    TempDir dir("ckpt");
    ASSERT_EQ(invoke(with(synth_args("train", dir.path()),
                       {"--epochs", "4", "--embedding-dim", "4", "--checkpoint-every", "2"}))
                  .rc,
              0);
    EXPECT_TRUE(fs::exists(dir / "checkpoint_epoch2.a2v"));
    EXPECT_TRUE(fs::exists(dir / "checkpoint_epoch4.a2v"));
    const ModelFile m = load_model_file(dir / "checkpoint_epoch2.a2v");
    EXPECT_EQ(m.model.embedding_dim(), 4u);
}

TEST(Cli, SubSeedsAreDistinctStreams) {
    EXPECT_NE(cli::sub_seed(0, 10), cli::sub_seed(0, 11));
    EXPECT_NE(cli::forest_seed(0, 0), cli::forest_seed(0, 1));
    EXPECT_EQ(cli::sub_seed(4, 10), Rng(4).derive(10).next_u64());
}
