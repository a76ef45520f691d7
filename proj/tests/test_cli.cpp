#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "corrlda/model.hpp"
#include "corrlda/retrieval.hpp"
#include "test_util.hpp"

using testutil::CliResult;
using testutil::run_cli;

namespace {

// Shared synthetic fixture arguments: small enough that train finishes in
// well under a second.
std::string gen_args(const std::string& prefix, unsigned seed = 7) {
    return "gen-synthetic --docs 30 --topics 2 --sensory-size 8 --text-size 8 "
           "--words-per-doc 20 --caption-len 3 --seed " +
           std::to_string(seed) + " --out-prefix " + prefix;
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("gen-synthetic writes the fixture family deterministically") {
    testutil::TempDir dir;
    const std::string prefix = (dir.path() / "syn").string();
    const CliResult r = run_cli(gen_args(prefix), dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.err.find("corrlda-summary subcommand=gen-synthetic") != std::string::npos);
    CHECK(r.err.find("status=ok") != std::string::npos);

    const std::string corpus = testutil::read_file(prefix + ".corpus.jsonl");
    CHECK(count_lines(corpus) == 30);
    CHECK(corpus.find("\"id\":\"doc00\"") != std::string::npos);
    CHECK(count_lines(testutil::read_file(prefix + ".traces.jsonl")) == 30);
    CHECK(count_lines(testutil::read_file(prefix + ".svocab.txt")) == 8);
    CHECK(count_lines(testutil::read_file(prefix + ".tvocab.txt")) == 8);

    const corrlda::ModelParams truth = corrlda::load_model(prefix + ".model.bin");
    CHECK(truth.k() == 2);
    CHECK(truth.sensory_size() == 8);
    CHECK(truth.text_size() == 8);

    SUBCASE("same seed, same bytes") {
        const std::string again = (dir.path() / "again").string();
        REQUIRE(run_cli(gen_args(again), dir).exit_code == 0);
        CHECK(testutil::read_file(again + ".corpus.jsonl") == corpus);
        CHECK(testutil::read_file(again + ".model.bin") ==
              testutil::read_file(prefix + ".model.bin"));
    }
    SUBCASE("another seed moves the corpus") {
        const std::string other = (dir.path() / "other").string();
        REQUIRE(run_cli(gen_args(other, 8), dir).exit_code == 0);
        CHECK(testutil::read_file(other + ".corpus.jsonl") != corpus);
    }
    SUBCASE("infeasible separated sizes are a usage error") {
        const CliResult bad = run_cli("gen-synthetic --docs 5 --topics 4 --sensory-size 2 "
                                      "--text-size 8 --separated --out-prefix " +
                                          (dir.path() / "bad").string(),
                                      dir);
        CHECK(bad.exit_code == 1);
        CHECK(bad.err.find("status=error") != std::string::npos);
    }
    SUBCASE("zero documents are a usage error") {
        const CliResult bad = run_cli(
            "gen-synthetic --docs 0 --out-prefix " + (dir.path() / "bad").string(), dir);
        CHECK(bad.exit_code == 1);
    }
}

TEST_CASE("train pipeline end to end") {
    testutil::TempDir dir;
    const std::string prefix = (dir.path() / "syn").string();
    REQUIRE(run_cli(gen_args(prefix), dir).exit_code == 0);

    const std::string common = " --corpus " + prefix + ".corpus.jsonl --sensory-vocab " + prefix +
                               ".svocab.txt --text-vocab " + prefix + ".tvocab.txt";
    const std::string model = (dir.path() / "model.bin").string();
    const CliResult r = run_cli(
        "train" + common + " --out " + model + " --topics 2 --alpha 0.2 --max-iters 30 --seed 3",
        dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.err.find("corrlda-summary subcommand=train") != std::string::npos);

    const auto report = nlohmann::json::parse(testutil::read_file(model + ".report.json"));
    CHECK(report.at("iters_run").get<std::size_t>() >= 1);
    CHECK(report.at("converged").is_boolean());
    const auto elbos = report.at("elbo_per_iter").get<std::vector<double>>();
    REQUIRE(!elbos.empty());
    CHECK(report.at("final_elbo").get<double>() == elbos.back());
    for (std::size_t i = 1; i < elbos.size(); ++i) CHECK(elbos[i] >= elbos[i - 1] - 1e-8);
    // The report must not embed timing, or rerun outputs could differ.
    CHECK(report.count("wall_time") == 0);
    CHECK(report.count("wall_time_s") == 0);

    SUBCASE("reruns are bit-identical, with and without a thread override") {
        const std::string rerun = (dir.path() / "rerun.bin").string();
        REQUIRE(run_cli("train" + common + " --out " + rerun +
                            " --topics 2 --alpha 0.2 --max-iters 30 --seed 3",
                        dir)
                    .exit_code == 0);
        CHECK(testutil::read_file(rerun) == testutil::read_file(model));
        CHECK(testutil::read_file(rerun + ".report.json") ==
              testutil::read_file(model + ".report.json"));

        const std::string threaded = (dir.path() / "threaded.bin").string();
        REQUIRE(run_cli("train" + common + " --out " + threaded +
                            " --topics 2 --alpha 0.2 --max-iters 30 --seed 3",
                        dir, "CORRLDA_THREADS=4")
                    .exit_code == 0);
        CHECK(testutil::read_file(threaded) == testutil::read_file(model));
    }
    SUBCASE("training can emit a ready-to-use index") {
        const std::string model2 = (dir.path() / "model2.bin").string();
        const std::string index = (dir.path() / "train.index.jsonl").string();
        REQUIRE(run_cli("train" + common + " --out " + model2 + " --topics 2 --seed 3" +
                            " --index-out " + index + " --reuse-train-theta",
                        dir)
                    .exit_code == 0);
        const corrlda::RetrievalIndex loaded = corrlda::load_index(index);
        CHECK(loaded.entries.size() == 30);
        CHECK(loaded.model_digest == corrlda::params_digest(corrlda::load_model(model2)));
    }
    SUBCASE("a config file supplies flag defaults") {
        const std::string cfg_path = (dir.path() / "train.cfg").string();
        testutil::write_file(cfg_path,
                             "# reference setup\ntopics=3\nmax-iters = 2\nseed=3\n\n");
        const std::string model3 = (dir.path() / "model3.bin").string();
        const CliResult cfg_run =
            run_cli("train" + common + " --out " + model3 + " --config " + cfg_path, dir);
        REQUIRE(cfg_run.exit_code == 0);
        CHECK(cfg_run.err.find("topics=3") != std::string::npos);
        CHECK(corrlda::load_model(model3).k() == 3);

        SUBCASE("explicit flags beat the config file") {
            const CliResult mixed = run_cli("train" + common + " --out " + model3 +
                                                " --topics 2 --config " + cfg_path,
                                            dir);
            REQUIRE(mixed.exit_code == 0);
            CHECK(corrlda::load_model(model3).k() == 2);
        }
        SUBCASE("unknown keys are usage errors") {
            testutil::write_file(cfg_path, "topicz=3\n");
            const CliResult bad =
                run_cli("train" + common + " --out " + model3 + " --config " + cfg_path, dir);
            CHECK(bad.exit_code == 1);
            CHECK(bad.err.find("unknown key") != std::string::npos);
        }
        SUBCASE("malformed values are usage errors") {
            testutil::write_file(cfg_path, "topics=three\n");
            CHECK(run_cli("train" + common + " --out " + model3 + " --config " + cfg_path, dir)
                      .exit_code == 1);
        }
    }
}

TEST_CASE("train error taxonomy") {
    testutil::TempDir dir;
    const std::string prefix = (dir.path() / "syn").string();
    REQUIRE(run_cli(gen_args(prefix), dir).exit_code == 0);
    const std::string common = " --corpus " + prefix + ".corpus.jsonl --sensory-vocab " + prefix +
                               ".svocab.txt --text-vocab " + prefix + ".tvocab.txt";

    CHECK(run_cli("train --corpus missing-everything-else.jsonl", dir).exit_code == 1);
    CHECK(run_cli("train" + common + " --out x.bin --no-such-flag", dir).exit_code == 1);
    CHECK(run_cli("train --help", dir).exit_code == 0);
    CHECK(run_cli("", dir).exit_code == 1); // a subcommand is required
    CHECK(run_cli("--help", dir).exit_code == 0);

    const CliResult missing = run_cli("train --corpus " + (dir.path() / "nope.jsonl").string() +
                                          " --sensory-vocab " + prefix + ".svocab.txt" +
                                          " --text-vocab " + prefix + ".tvocab.txt" + " --out " +
                                          (dir.path() / "m.bin").string(),
                                      dir);
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("exit=2") != std::string::npos);

    const CliResult blowup = run_cli("train" + common + " --out " +
                                         (dir.path() / "m.bin").string() +
                                         " --topics 2 --alpha 1e308 --max-iters 2",
                                     dir);
    CHECK(blowup.exit_code == 3);
    CHECK(blowup.err.find("numerical error") != std::string::npos);
}

TEST_CASE("retrieve and annotate surfaces") {
    testutil::TempDir dir;
    const std::string prefix = (dir.path() / "syn").string();
    REQUIRE(run_cli(gen_args(prefix), dir).exit_code == 0);
    const std::string model = (dir.path() / "model.bin").string();
    const std::string index = (dir.path() / "index.jsonl").string();
    const std::string common = " --corpus " + prefix + ".corpus.jsonl --sensory-vocab " + prefix +
                               ".svocab.txt --text-vocab " + prefix + ".tvocab.txt";
    REQUIRE(run_cli("train" + common + " --out " + model +
                        " --topics 2 --seed 3 --max-iters 20 --index-out " + index,
                    dir)
                .exit_code == 0);
    const std::string tvocab = " --text-vocab " + prefix + ".tvocab.txt";

    const CliResult r =
        run_cli("retrieve --model " + model + " --index " + index + tvocab + " --query t1", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(count_lines(r.out) == 10); // default --top
    CHECK(r.out.rfind("1\tdoc", 0) == 0); // rank, then a doc id
    CHECK(r.err.find("results=10") != std::string::npos);

    SUBCASE("an index built on the fly matches the saved one") {
        const CliResult built = run_cli("retrieve --model " + model + common + " --query t1", dir);
        REQUIRE(built.exit_code == 0);
        CHECK(built.out == r.out);
    }
    SUBCASE("queries are case folded") {
        const CliResult upper =
            run_cli("retrieve --model " + model + " --index " + index + tvocab +
                        " --query \"T1!\"",
                    dir);
        REQUIRE(upper.exit_code == 0);
        CHECK(upper.out == r.out);
    }
    SUBCASE("out-of-vocabulary tokens are reported, stopword-only queries fail") {
        const CliResult oov = run_cli("retrieve --model " + model + " --index " + index + tvocab +
                                          " --query \"t1 zebra\"",
                                      dir);
        REQUIRE(oov.exit_code == 0);
        CHECK(oov.out.rfind("# dropped-tokens: zebra\n", 0) == 0);

        const CliResult empty = run_cli("retrieve --model " + model + " --index " + index +
                                            tvocab + " --query \"the and of\"",
                                        dir);
        CHECK(empty.exit_code == 2);
    }
    SUBCASE("top and threshold shape the result list") {
        const CliResult top3 = run_cli("retrieve --model " + model + " --index " + index + tvocab +
                                           " --query t1 --top 3",
                                       dir);
        REQUIRE(top3.exit_code == 0);
        CHECK(count_lines(top3.out) == 3);
        CHECK(r.out.rfind(top3.out.substr(0, top3.out.size() - 1), 0) == 0); // prefix of full run

        const CliResult none = run_cli("retrieve --model " + model + " --index " + index + tvocab +
                                           " --query t1 --threshold 1.5",
                                       dir);
        REQUIRE(none.exit_code == 0);
        CHECK(none.out.empty());
        CHECK(run_cli("retrieve --model " + model + " --index " + index + tvocab +
                          " --query t1 --top 0",
                      dir)
                  .exit_code == 1);
    }
    SUBCASE("--out mirrors stdout into a file") {
        const std::string out_file = (dir.path() / "results.tsv").string();
        const CliResult to_file = run_cli("retrieve --model " + model + " --index " + index +
                                              tvocab + " --query t1 --out " + out_file,
                                          dir);
        REQUIRE(to_file.exit_code == 0);
        CHECK(to_file.out.empty());
        CHECK(testutil::read_file(out_file) == r.out);
    }
    SUBCASE("annotate lists words per video") {
        const CliResult ann = run_cli("annotate --model " + model + common + " --top 2", dir);
        REQUIRE(ann.exit_code == 0);
        std::istringstream lines(ann.out);
        std::string line;
        std::size_t headers = 0;
        std::size_t rows = 0;
        while (std::getline(lines, line)) {
            if (line.rfind("# doc", 0) == 0) {
                ++headers;
            } else {
                ++rows;
                CHECK(line.find("\tt") != std::string::npos); // token column
            }
        }
        CHECK(headers == 30);
        CHECK(rows == 60);

        SUBCASE("an unreachable threshold leaves only the headers") {
            const CliResult bare =
                run_cli("annotate --model " + model + common + " --top 2 --threshold 1.0", dir);
            REQUIRE(bare.exit_code == 0);
            CHECK(count_lines(bare.out) == 30);
            CHECK(bare.out.find('\t') == std::string::npos);
        }
    }
    SUBCASE("missing model file is a data error") {
        CHECK(run_cli("retrieve --model " + (dir.path() / "ghost.bin").string() + " --index " +
                          index + tvocab + " --query t1",
                      dir)
                  .exit_code == 2);
    }
}

TEST_CASE("evaluation subcommands") {
    testutil::TempDir dir;
    const std::string prefix = (dir.path() / "syn").string();
    REQUIRE(run_cli(gen_args(prefix), dir).exit_code == 0);
    const std::string model = (dir.path() / "model.bin").string();
    const std::string index = (dir.path() / "index.jsonl").string();
    const std::string common = " --corpus " + prefix + ".corpus.jsonl --sensory-vocab " + prefix +
                               ".svocab.txt --text-vocab " + prefix + ".tvocab.txt";
    REQUIRE(run_cli("train" + common + " --out " + model +
                        " --topics 2 --seed 3 --max-iters 20 --index-out " + index,
                    dir)
                .exit_code == 0);
    const std::string tvocab = " --text-vocab " + prefix + ".tvocab.txt";

    SUBCASE("eval-retrieval scores judged queries") {
        // Judge the top result for t1 as the one relevant document: rank 1
        // hit gives average precision 1.
        const CliResult top1 = run_cli(
            "retrieve --model " + model + " --index " + index + tvocab + " --query t1 --top 1",
            dir);
        REQUIRE(top1.exit_code == 0);
        const std::string best = top1.out.substr(2, top1.out.find('\t', 2) - 2);

        const std::string judgments = (dir.path() / "judgments.json").string();
        testutil::write_file(judgments, "{\"t1\": [\"" + best + "\"]}");
        const std::string report_path = (dir.path() / "evalr.json").string();
        const std::string curves = (dir.path() / "curves").string();
        const CliResult ev = run_cli("eval-retrieval --model " + model + " --index " + index +
                                         tvocab + " --judgments " + judgments + " --k 10" +
                                         " --pr-curves " + curves + " --out " + report_path,
                                     dir);
        REQUIRE(ev.exit_code == 0);

        const auto report = nlohmann::json::parse(testutil::read_file(report_path));
        CHECK(report.at("k").get<std::size_t>() == 10);
        CHECK(report.at("map_at_k").get<double>() == 1.0);
        REQUIRE(report.at("queries").size() == 1);
        CHECK(report.at("queries")[0].at("query") == "t1");
        CHECK(report.at("queries")[0].at("precision").get<double>() == 0.1);
        CHECK(report.at("queries")[0].at("recall").get<double>() == 1.0);

        const std::string csv = testutil::read_file(curves + "/t1.csv");
        CHECK(csv.rfind("rank,recall,precision\n", 0) == 0);
        CHECK(count_lines(csv) == 31); // header plus one row per document

        SUBCASE("unknown judged ids are rejected") {
            testutil::write_file(judgments, "{\"t1\": [\"docXX\"]}");
            CHECK(run_cli("eval-retrieval --model " + model + " --index " + index + tvocab +
                              " --judgments " + judgments,
                          dir)
                      .exit_code == 2);
        }
    }
    SUBCASE("eval-annotation is perfect when truth equals the annotator output") {
        // Uniform emissions: every video annotates to words t0, t1, t2, so a
        // corpus whose captions are exactly those words scores F = 1.
        std::vector<double> pi(1 * 8, 1.0 / 8.0);
        std::vector<double> beta(1 * 8, 1.0 / 8.0);
        const std::string uniform = (dir.path() / "uniform.bin").string();
        corrlda::save_model(corrlda::ModelParams(1, 8, 8, 0.5, pi, beta), uniform);

        const std::string corpus_path = (dir.path() / "truth.jsonl").string();
        std::string lines;
        for (int d = 0; d < 3; ++d) {
            lines += "{\"id\":\"v" + std::to_string(d) +
                     "\",\"sensory\":{\"" + std::to_string(d) +
                     "\":2},\"caption\":[\"t0\",\"t1\",\"t2\"],\"category\":null}\n";
        }
        testutil::write_file(corpus_path, lines);

        const std::string report_path = (dir.path() / "evala.json").string();
        const CliResult ev = run_cli("eval-annotation --model " + uniform + " --corpus " +
                                         corpus_path + " --sensory-vocab " + prefix +
                                         ".svocab.txt" + tvocab + " --top 3 --out " + report_path,
                                     dir);
        REQUIRE(ev.exit_code == 0);
        const auto report = nlohmann::json::parse(testutil::read_file(report_path));
        CHECK(report.at("top_k").get<std::size_t>() == 3);
        CHECK(report.at("words_evaluated").get<std::size_t>() == 3);
        CHECK(report.at("monte_carlo_words").get<std::size_t>() == 0);
        CHECK(report.at("mpw_precision").get<double>() == 1.0);
        CHECK(report.at("mpw_recall").get<double>() == 1.0);
        CHECK(report.at("f_score").get<double>() == 1.0);
        CHECK(ev.err.find("f_score=1") != std::string::npos);
    }
    SUBCASE("perplexity in both modes") {
        std::vector<double> pi(2 * 8, 1.0 / 8.0);
        std::vector<double> beta(2 * 8, 1.0 / 8.0);
        const std::string uniform = (dir.path() / "uniform2.bin").string();
        corrlda::save_model(corrlda::ModelParams(2, 8, 8, 0.5, pi, beta), uniform);

        const std::string report_path = (dir.path() / "perp.json").string();
        const CliResult truth_mode = run_cli("perplexity --model " + uniform + common +
                                                 " --use-truth-captions --out " + report_path,
                                             dir);
        REQUIRE(truth_mode.exit_code == 0);
        auto report = nlohmann::json::parse(testutil::read_file(report_path));
        CHECK(report.at("mode") == "truth-captions");
        CHECK(report.at("perplexity").get<double>() ==
              testutil::Approx(8.0).epsilon(1e-6)); // dictionary size

        const CliResult swept = run_cli("perplexity --model " + uniform + common +
                                            " --lengths 2,4,8 --out " + report_path,
                                        dir);
        REQUIRE(swept.exit_code == 0);
        report = nlohmann::json::parse(testutil::read_file(report_path));
        CHECK(report.at("mode") == "generated");
        const auto& by_length = report.at("perplexity_by_length");
        REQUIRE(by_length.size() == 3);
        for (const char* key : {"2", "4", "8"}) {
            CHECK(by_length.at(key).get<double>() == testutil::Approx(8.0).epsilon(1e-6));
        }

        // The default sweep asks for lengths beyond this tiny dictionary.
        CHECK(run_cli("perplexity --model " + uniform + common, dir).exit_code == 2);
    }
    SUBCASE("default perplexity sweep covers ten lengths") {
        // A wider text vocabulary admits the default 5..50 sweep; the
        // generator's ground-truth model works as-is.
        const std::string wide = (dir.path() / "wide").string();
        REQUIRE(run_cli("gen-synthetic --docs 10 --topics 2 --sensory-size 8 --text-size 55 "
                        "--words-per-doc 20 --caption-len 3 --seed 5 --out-prefix " + wide,
                        dir)
                    .exit_code == 0);
        const std::string report_path = (dir.path() / "sweep.json").string();
        const CliResult swept = run_cli(
            "perplexity --model " + wide + ".model.bin --corpus " + wide + ".corpus.jsonl" +
                " --sensory-vocab " + wide + ".svocab.txt --text-vocab " + wide +
                ".tvocab.txt --out " + report_path,
            dir);
        REQUIRE(swept.exit_code == 0);
        const auto report = nlohmann::json::parse(testutil::read_file(report_path));
        const auto& by_length = report.at("perplexity_by_length");
        CHECK(by_length.size() == 10);
        for (const char* key : {"5", "50"}) CHECK(by_length.contains(key));
    }
}

} // TEST_SUITE
