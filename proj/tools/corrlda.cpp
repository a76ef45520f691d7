// Command-line front end: train, retrieve, annotate, eval-retrieval,
// eval-annotation, perplexity, gen-synthetic.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 numerical failure. Program output (TSV/JSON/CSV) goes to standard
// output or files; a machine-readable summary line goes to standard error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "corrlda/annotation.hpp"
#include "corrlda/corpus.hpp"
#include "corrlda/errors.hpp"
#include "corrlda/eval.hpp"
#include "corrlda/inference.hpp"
#include "corrlda/model.hpp"
#include "corrlda/numerics.hpp"
#include "corrlda/retrieval.hpp"
#include "corrlda/rng.hpp"
#include "corrlda/stopwords.hpp"
#include "corrlda/tokenize.hpp"
#include "corrlda/vocabulary.hpp"

namespace {

using namespace corrlda;

// Flag misuse that CLI11 cannot express declaratively (exit code 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Space-separated key=value line on stderr; values with spaces get quoted.
class Summary {
public:
    explicit Summary(std::string subcommand) { add("subcommand", std::move(subcommand)); }

    void add(const std::string& key, std::string value) {
        if (value.find(' ') != std::string::npos) {
            value = '"' + value + '"';
        }
        items_.emplace_back(key, std::move(value));
    }
    void add(const std::string& key, double value) { add(key, fmt6(value)); }
    void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }

    void emit() const {
        std::ostringstream os;
        os << "corrlda-summary";
        for (const auto& [key, value] : items_) os << ' ' << key << '=' << value;
        std::cerr << os.str() << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

// Output sink: --out file when given, otherwise standard output.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw ValidationError("cannot write output file: " + path);
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
    void finish(const std::string& path) {
        if (file_.is_open()) {
            file_.close();
            if (!file_) {
                throw ValidationError("failed writing output file: " + path);
            }
        } else {
            std::cout.flush();
        }
    }

private:
    std::ofstream file_;
};

void write_json_report(const nlohmann::ordered_json& report, const std::string& out_path) {
    OutputTarget target(out_path);
    target.stream() << report.dump(2) << '\n';
    target.finish(out_path);
}

StopwordSet load_stopwords(const std::string& path) {
    if (path.empty()) return StopwordSet::builtin();
    return StopwordSet::load(path);
}

struct TrainArgs {
    std::string corpus_path;
    std::string sensory_vocab_path;
    std::string text_vocab_path;
    std::string out_path;
    std::string report_path;
    std::string index_out_path;
    std::string config_path;
    std::set<std::string> given_flags; // canonical names of flags set on the command line
    bool reuse_train_theta = false;
    TrainConfig cfg;
};

struct QueryArgs {
    std::string model_path;
    std::string index_path;
    std::string corpus_path;
    std::string sensory_vocab_path;
    std::string text_vocab_path;
    std::string stopwords_path;
    std::string out_path;
    std::string query;
    std::size_t top_n = 10;
    double threshold = 0.0;
    bool has_threshold = false;
    TrainConfig cfg;
};

struct AnnotateArgs {
    std::string model_path;
    std::string corpus_path;
    std::string sensory_vocab_path;
    std::string text_vocab_path;
    std::string out_path;
    std::size_t top_k = 10;
    double threshold = 0.0;
    bool has_threshold = false;
    TrainConfig cfg;
};

struct EvalRetrievalArgs {
    std::string model_path;
    std::string index_path;
    std::string corpus_path;
    std::string sensory_vocab_path;
    std::string text_vocab_path;
    std::string stopwords_path;
    std::string judgments_path;
    std::string pr_curves_dir;
    std::string out_path;
    std::size_t k = 10;
    TrainConfig cfg;
};

struct EvalAnnotationArgs {
    std::string model_path;
    std::string corpus_path;
    std::string sensory_vocab_path;
    std::string text_vocab_path;
    std::string out_path;
    std::size_t top_k = 10;
    std::size_t mc_samples = 100;
    std::uint64_t seed = 42;
    TrainConfig cfg;
};

struct PerplexityArgs {
    std::string model_path;
    std::string corpus_path;
    std::string sensory_vocab_path;
    std::string text_vocab_path;
    std::string out_path;
    std::vector<std::size_t> lengths = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    bool use_truth_captions = false;
    TrainConfig cfg;
};

struct GenSyntheticArgs {
    std::size_t topics = 3;
    std::size_t docs = 0;
    std::size_t sensory_size = 30;
    std::size_t text_size = 30;
    std::size_t words_per_doc = 100;
    std::size_t caption_len = 8;
    double alpha = 0.2;
    std::uint64_t seed = 42;
    bool separated = false;
    std::string out_prefix;
};

void add_inference_flags(CLI::App* sc, TrainConfig& cfg) {
    sc->add_option("--e-step-threshold", cfg.e_step_threshold,
                   "Per-document gamma convergence threshold")
        ->capture_default_str();
    sc->add_option("--e-step-max-iters", cfg.e_step_max_iters,
                   "Per-document coordinate-ascent iteration cap")
        ->capture_default_str();
}

Vocabulary require_vocab(const std::string& path, const char* flag) {
    if (path.empty()) {
        throw UsageError(std::string(flag) + " is required for this invocation");
    }
    return Vocabulary::load(path);
}

// Loads an index directly or builds one from a corpus with the model.
RetrievalIndex obtain_index(const std::string& index_path, const std::string& corpus_path,
                            const std::string& sensory_vocab_path, const Vocabulary& text_vocab,
                            const ModelParams& params, const TrainConfig& cfg) {
    if (!index_path.empty()) {
        return load_index(index_path);
    }
    if (corpus_path.empty()) {
        throw UsageError("either --index or --corpus must be given");
    }
    const Vocabulary sv = require_vocab(sensory_vocab_path, "--sensory-vocab");
    const Corpus corpus = load_corpus(corpus_path, sv, text_vocab);
    return build_index(corpus, params, cfg);
}

std::string strip(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

// Flat key=value training configuration. Keys are the long training flags
// without the leading dashes; values apply only where the command line did
// not set the flag explicitly. Blank lines and '#' comments are skipped.
void apply_train_config(TrainArgs& args) {
    if (args.config_path.empty()) return;
    std::ifstream in(args.config_path);
    if (!in) {
        throw ValidationError("cannot open config file: " + args.config_path);
    }

    auto bad = [&args](std::size_t lineno, const std::string& what) {
        return UsageError("config file " + args.config_path + " line " +
                          std::to_string(lineno) + ": " + what);
    };
    auto parse_size = [&bad](std::size_t lineno, const std::string& value) {
        std::size_t used = 0;
        unsigned long long parsed = 0;
        try {
            parsed = std::stoull(value, &used);
        } catch (const std::exception&) {
            throw bad(lineno, "expected a non-negative integer, got '" + value + "'");
        }
        if (used != value.size() || value.front() == '-') {
            throw bad(lineno, "expected a non-negative integer, got '" + value + "'");
        }
        return static_cast<std::size_t>(parsed);
    };
    auto parse_double = [&bad](std::size_t lineno, const std::string& value) {
        std::size_t used = 0;
        double parsed = 0.0;
        try {
            parsed = std::stod(value, &used);
        } catch (const std::exception&) {
            throw bad(lineno, "expected a number, got '" + value + "'");
        }
        if (used != value.size()) {
            throw bad(lineno, "expected a number, got '" + value + "'");
        }
        return parsed;
    };
    auto parse_bool = [&bad](std::size_t lineno, const std::string& value) {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw bad(lineno, "expected true or false, got '" + value + "'");
    };
    auto overridden = [&args](const char* flag) { return args.given_flags.count(flag) > 0; };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = strip(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw bad(lineno, "expected key=value");
        }
        const std::string key = strip(text.substr(0, eq));
        const std::string value = strip(text.substr(eq + 1));
        if (key.empty()) {
            throw bad(lineno, "empty key");
        }

        if (key == "topics") {
            if (!overridden("--topics")) args.cfg.k = parse_size(lineno, value);
        } else if (key == "alpha") {
            if (!overridden("--alpha")) args.cfg.alpha = parse_double(lineno, value);
        } else if (key == "threshold") {
            if (!overridden("--threshold")) args.cfg.em_threshold = parse_double(lineno, value);
        } else if (key == "absolute-threshold") {
            if (!overridden("--absolute-threshold")) {
                args.cfg.absolute_em_threshold = parse_bool(lineno, value);
            }
        } else if (key == "max-iters") {
            if (!overridden("--max-iters")) args.cfg.max_em_iters = parse_size(lineno, value);
        } else if (key == "eta") {
            if (!overridden("--eta")) args.cfg.smoothing_eta = parse_double(lineno, value);
        } else if (key == "seed") {
            if (!overridden("--seed")) args.cfg.seed = parse_size(lineno, value);
        } else if (key == "e-step-threshold") {
            if (!overridden("--e-step-threshold")) {
                args.cfg.e_step_threshold = parse_double(lineno, value);
            }
        } else if (key == "e-step-max-iters") {
            if (!overridden("--e-step-max-iters")) {
                args.cfg.e_step_max_iters = parse_size(lineno, value);
            }
        } else {
            throw bad(lineno, "unknown key '" + key + "'");
        }
    }
}

int run_train(const TrainArgs& args, Summary& summary) {
    const Vocabulary sv = Vocabulary::load(args.sensory_vocab_path);
    const Vocabulary tv = Vocabulary::load(args.text_vocab_path);
    const Corpus corpus = load_corpus(args.corpus_path, sv, tv);

    const TrainResult result = train(corpus, args.cfg);
    save_model(result.params, args.out_path);

    nlohmann::ordered_json report;
    report["iters_run"] = result.report.iters_run;
    report["converged"] = result.report.converged;
    report["final_elbo"] = result.report.elbo_per_iter.back();
    report["elbo_per_iter"] = result.report.elbo_per_iter;
    const std::string report_path =
        args.report_path.empty() ? args.out_path + ".report.json" : args.report_path;
    std::ofstream report_out(report_path, std::ios::binary);
    if (!report_out) {
        throw ValidationError("cannot write report file: " + report_path);
    }
    report_out << report.dump(2) << '\n';
    if (!report_out) {
        throw ValidationError("failed writing report file: " + report_path);
    }

    if (!args.index_out_path.empty()) {
        const RetrievalIndex index = build_index(
            corpus, result.params, args.cfg, args.reuse_train_theta ? &result.states : nullptr);
        save_index(index, args.index_out_path);
        summary.add("index", args.index_out_path);
    }

    summary.add("docs", corpus.size());
    summary.add("topics", args.cfg.k);
    summary.add("iters", result.report.iters_run);
    summary.add("converged", result.report.converged);
    summary.add("final_elbo", fmt10(result.report.elbo_per_iter.back()));
    summary.add("model", args.out_path);
    summary.add("report", report_path);
    summary.add("train_s", fmt6(result.report.wall_time_s));
    return 0;
}

int run_retrieve(const QueryArgs& args, Summary& summary) {
    const Vocabulary tv = require_vocab(args.text_vocab_path, "--text-vocab");
    const ModelParams params = load_model(args.model_path);
    const StopwordSet stopwords = load_stopwords(args.stopwords_path);
    const RetrievalIndex index = obtain_index(args.index_path, args.corpus_path,
                                              args.sensory_vocab_path, tv, params, args.cfg);

    const std::optional<double> threshold =
        args.has_threshold ? std::optional<double>(args.threshold) : std::nullopt;
    const RetrievalResult result =
        retrieve(args.query, index, params, tv, stopwords, args.top_n, threshold);

    OutputTarget target(args.out_path);
    std::ostream& out = target.stream();
    if (!result.oov_tokens.empty()) {
        out << "# dropped-tokens:";
        for (const std::string& tok : result.oov_tokens) out << ' ' << tok;
        out << '\n';
    }
    for (std::size_t r = 0; r < result.ranked.items.size(); ++r) {
        const ScoredId& item = result.ranked.items[r];
        out << (r + 1) << '\t' << item.id << '\t' << fmt6(item.score) << '\n';
    }
    target.finish(args.out_path);

    summary.add("results", result.ranked.items.size());
    summary.add("oov", result.oov_tokens.size());
    summary.add("stopwords_removed", result.stopword_count);
    return 0;
}

int run_annotate(const AnnotateArgs& args, Summary& summary) {
    const Vocabulary sv = require_vocab(args.sensory_vocab_path, "--sensory-vocab");
    const Vocabulary tv = require_vocab(args.text_vocab_path, "--text-vocab");
    const ModelParams params = load_model(args.model_path);
    const Corpus corpus = load_corpus(args.corpus_path, sv, tv);

    const std::optional<double> threshold =
        args.has_threshold ? std::optional<double>(args.threshold) : std::nullopt;
    OutputTarget target(args.out_path);
    std::ostream& out = target.stream();
    for (const Document& doc : corpus.documents()) {
        const Annotation annotation =
            annotate(doc.sensory, params, args.cfg, args.top_k, threshold, doc.id);
        out << "# " << doc.id << '\n';
        for (std::size_t r = 0; r < annotation.words.size(); ++r) {
            const ScoredWord& word = annotation.words[r];
            out << (r + 1) << '\t' << tv.token(word.word) << '\t' << fmt6(word.score) << '\n';
        }
    }
    target.finish(args.out_path);

    summary.add("videos", corpus.size());
    summary.add("top", args.top_k);
    return 0;
}

std::string sanitize_filename(const std::string& name) {
    std::string safe;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        safe.push_back(ok ? c : '_');
    }
    return safe.empty() ? "query" : safe;
}

int run_eval_retrieval(const EvalRetrievalArgs& args, Summary& summary) {
    const Vocabulary tv = require_vocab(args.text_vocab_path, "--text-vocab");
    const ModelParams params = load_model(args.model_path);
    const StopwordSet stopwords = load_stopwords(args.stopwords_path);
    const RetrievalIndex index = obtain_index(args.index_path, args.corpus_path,
                                              args.sensory_vocab_path, tv, params, args.cfg);
    const RelevanceJudgments judgments = load_judgments(args.judgments_path);

    std::set<std::string> known_ids;
    for (const IndexEntry& entry : index.entries) known_ids.insert(entry.id);
    for (const auto& [query, relevant] : judgments) {
        for (const std::string& id : relevant) {
            if (known_ids.count(id) == 0) {
                throw ValidationError("judgments for query '" + query +
                                      "' reference unknown doc id '" + id + "'");
            }
        }
    }

    // Full-length rankings serve both the @k metrics and the PR curves.
    std::map<std::string, RankedList> rankings;
    for (const auto& [query, relevant] : judgments) {
        RetrievalResult result =
            retrieve(query, index, params, tv, stopwords, index.entries.size());
        rankings.emplace(query, std::move(result.ranked));
    }

    nlohmann::ordered_json report;
    report["k"] = args.k;
    report["queries"] = nlohmann::ordered_json::array();
    for (const auto& [query, ranking] : rankings) {
        const std::set<std::string>& relevant = judgments.at(query);
        const auto [precision, recall] = precision_recall_at_k(ranking, relevant, args.k);
        nlohmann::ordered_json entry;
        entry["query"] = query;
        entry["precision"] = precision;
        entry["recall"] = recall;
        entry["average_precision"] = average_precision_at_k(ranking, relevant, args.k);
        report["queries"].push_back(std::move(entry));
    }
    const double map_value = map_at_k(rankings, judgments, args.k);
    report["map_at_k"] = map_value;

    if (!args.pr_curves_dir.empty()) {
        std::filesystem::create_directories(args.pr_curves_dir);
        for (const auto& [query, ranking] : rankings) {
            const std::vector<PrPoint> curve = pr_curve(ranking, judgments.at(query));
            const std::filesystem::path path =
                std::filesystem::path(args.pr_curves_dir) / (sanitize_filename(query) + ".csv");
            std::ofstream csv(path, std::ios::binary);
            if (!csv) {
                throw ValidationError("cannot write PR curve file: " + path.string());
            }
            csv << "rank,recall,precision\n";
            for (const PrPoint& point : curve) {
                csv << point.rank << ',' << fmt10(point.recall) << ',' << fmt10(point.precision)
                    << '\n';
            }
        }
        summary.add("pr_curves", args.pr_curves_dir);
    }

    write_json_report(report, args.out_path);
    summary.add("queries", rankings.size());
    summary.add("map_at_k", fmt10(map_value));
    return 0;
}

int run_eval_annotation(const EvalAnnotationArgs& args, Summary& summary) {
    const Vocabulary sv = require_vocab(args.sensory_vocab_path, "--sensory-vocab");
    const Vocabulary tv = require_vocab(args.text_vocab_path, "--text-vocab");
    const ModelParams params = load_model(args.model_path);
    const Corpus corpus = load_corpus(args.corpus_path, sv, tv);

    std::map<std::string, std::set<std::size_t>> annotations;
    std::map<std::string, std::set<std::size_t>> truth;
    for (const Document& doc : corpus.documents()) {
        const Annotation annotation =
            annotate(doc.sensory, params, args.cfg, args.top_k, std::nullopt, doc.id);
        std::set<std::size_t>& words = annotations[doc.id];
        for (const ScoredWord& word : annotation.words) words.insert(word.word);
        truth[doc.id] = std::set<std::size_t>(doc.caption.begin(), doc.caption.end());
    }

    const PerWordMetrics metrics =
        per_word_metrics(annotations, truth, tv.size(), args.mc_samples, args.seed);

    nlohmann::ordered_json report;
    report["top_k"] = args.top_k;
    report["mc_samples"] = args.mc_samples;
    report["seed"] = args.seed;
    report["words_evaluated"] = metrics.words_evaluated;
    report["monte_carlo_words"] = metrics.monte_carlo_words;
    report["mpw_precision"] = metrics.precision;
    report["mpw_recall"] = metrics.recall;
    report["f_score"] = metrics.f_score;
    write_json_report(report, args.out_path);

    summary.add("words", metrics.words_evaluated);
    summary.add("mc_words", metrics.monte_carlo_words);
    summary.add("f_score", fmt10(metrics.f_score));
    return 0;
}

int run_perplexity(const PerplexityArgs& args, Summary& summary) {
    const Vocabulary sv = require_vocab(args.sensory_vocab_path, "--sensory-vocab");
    const Vocabulary tv = require_vocab(args.text_vocab_path, "--text-vocab");
    const ModelParams params = load_model(args.model_path);
    const Corpus corpus = load_corpus(args.corpus_path, sv, tv);

    nlohmann::ordered_json report;
    if (args.use_truth_captions) {
        const double value = perplexity(corpus.documents(), params, args.cfg);
        report["mode"] = "truth-captions";
        report["perplexity"] = value;
        summary.add("mode", std::string("truth-captions"));
        summary.add("perplexity", fmt10(value));
    } else {
        const auto sweep = perplexity_sweep(corpus, params, args.cfg, args.lengths);
        report["mode"] = "generated";
        nlohmann::ordered_json by_length;
        for (const auto& [length, value] : sweep) {
            by_length[std::to_string(length)] = value;
        }
        report["perplexity_by_length"] = std::move(by_length);
        summary.add("mode", std::string("generated"));
        summary.add("lengths", sweep.size());
    }
    write_json_report(report, args.out_path);
    summary.add("docs", corpus.size());
    return 0;
}

// Block-structured rows for recovery tests: topic k owns a contiguous slice
// of the vocabulary, with a vanishing off-block floor keeping entries
// positive.
std::vector<double> separated_rows(std::size_t k, std::size_t size) {
    std::vector<double> table(k * size, 1e-8);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t begin = j * size / k;
        const std::size_t end = (j + 1) * size / k;
        for (std::size_t w = begin; w < end; ++w) {
            table[j * size + w] = 1.0 / static_cast<double>(end - begin);
        }
        normalize(std::span<double>(table).subspan(j * size, size));
    }
    return table;
}

std::vector<double> dirichlet_rows(std::size_t k, std::size_t size, Rng& rng) {
    std::vector<double> table(k * size);
    for (std::size_t j = 0; j < k; ++j) {
        auto row = std::span<double>(table).subspan(j * size, size);
        rng.next_dirichlet(1.0, row);
        for (double& v : row) v = std::max(v, 1e-12);
        normalize(row);
    }
    return table;
}

int run_gen_synthetic(const GenSyntheticArgs& args, Summary& summary) {
    if (args.docs == 0 || args.topics == 0 || args.sensory_size == 0 || args.text_size == 0 ||
        args.words_per_doc == 0) {
        throw UsageError("--docs, --topics, --sensory-size, --text-size and --words-per-doc "
                         "must all be positive");
    }
    if (args.separated && (args.sensory_size < args.topics || args.text_size < args.topics)) {
        throw UsageError("--separated needs vocabulary sizes of at least --topics");
    }
    if (args.out_prefix.empty()) {
        throw UsageError("--out-prefix is required");
    }
    if (!(args.alpha > 0.0)) {
        throw UsageError("--alpha must be positive");
    }

    std::vector<std::string> sensory_tokens;
    for (std::size_t w = 0; w < args.sensory_size; ++w) {
        sensory_tokens.push_back("s" + std::to_string(w));
    }
    std::vector<std::string> text_tokens;
    for (std::size_t w = 0; w < args.text_size; ++w) {
        text_tokens.push_back("t" + std::to_string(w));
    }
    const Vocabulary sv = Vocabulary::from_tokens(std::move(sensory_tokens));
    const Vocabulary tv = Vocabulary::from_tokens(std::move(text_tokens));

    Rng rng(args.seed);
    std::vector<double> pi;
    std::vector<double> beta;
    if (args.separated) {
        pi = separated_rows(args.topics, args.sensory_size);
        beta = separated_rows(args.topics, args.text_size);
    } else {
        pi = dirichlet_rows(args.topics, args.sensory_size, rng);
        beta = dirichlet_rows(args.topics, args.text_size, rng);
    }
    const ModelParams truth(args.topics, args.sensory_size, args.text_size, args.alpha,
                            std::move(pi), std::move(beta));

    // Per-document seeds come from one stream so sampling stays reproducible.
    std::vector<std::uint64_t> doc_seeds(args.docs);
    for (auto& s : doc_seeds) s = rng.next_raw();

    const std::size_t id_width = std::to_string(args.docs - 1).size();
    std::vector<Document> docs;
    std::vector<LatentTrace> traces;
    docs.reserve(args.docs);
    traces.reserve(args.docs);
    for (std::size_t d = 0; d < args.docs; ++d) {
        std::string id = std::to_string(d);
        id.insert(0, id_width - id.size(), '0');
        auto [doc, trace] = sample_document(truth, args.words_per_doc, args.caption_len,
                                            doc_seeds[d], "doc" + id);
        docs.push_back(std::move(doc));
        traces.push_back(std::move(trace));
    }
    const Corpus corpus(std::move(docs), sv, tv);

    const std::string corpus_path = args.out_prefix + ".corpus.jsonl";
    const std::string model_path = args.out_prefix + ".model.bin";
    const std::string traces_path = args.out_prefix + ".traces.jsonl";
    const std::string svocab_path = args.out_prefix + ".svocab.txt";
    const std::string tvocab_path = args.out_prefix + ".tvocab.txt";

    write_corpus(corpus, corpus_path);
    save_model(truth, model_path);
    sv.save(svocab_path);
    tv.save(tvocab_path);

    std::ofstream trace_out(traces_path, std::ios::binary);
    if (!trace_out) {
        throw ValidationError("cannot write traces file: " + traces_path);
    }
    for (std::size_t d = 0; d < traces.size(); ++d) {
        nlohmann::ordered_json obj;
        obj["id"] = corpus.doc(d).id;
        obj["theta"] = traces[d].theta;
        obj["topics"] = traces[d].topics;
        obj["caption_sources"] = traces[d].caption_sources;
        trace_out << obj.dump() << '\n';
    }
    if (!trace_out) {
        throw ValidationError("failed writing traces file: " + traces_path);
    }

    summary.add("docs", args.docs);
    summary.add("topics", args.topics);
    summary.add("separated", args.separated);
    summary.add("corpus", corpus_path);
    summary.add("model", model_path);
    summary.add("traces", traces_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correspondence topic model: training, retrieval, annotation, evaluation"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train_sc = app.add_subcommand("train", "Train a model with variational EM");
    train_sc->add_option("--corpus", train_args.corpus_path, "Training corpus (JSON-lines)")
        ->required();
    train_sc->add_option("--sensory-vocab", train_args.sensory_vocab_path, "Sensory vocabulary")
        ->required();
    train_sc->add_option("--text-vocab", train_args.text_vocab_path, "Text vocabulary")
        ->required();
    train_sc->add_option("--out", train_args.out_path, "Output model file")->required();
    train_sc->add_option("--report", train_args.report_path,
                         "Training report JSON (default: <out>.report.json)");
    train_sc->add_option("--topics", train_args.cfg.k, "Number of topics")->capture_default_str();
    train_sc->add_option("--alpha", train_args.cfg.alpha, "Symmetric Dirichlet prior")
        ->capture_default_str();
    train_sc->add_option("--threshold", train_args.cfg.em_threshold, "EM convergence threshold")
        ->capture_default_str();
    train_sc
        ->add_flag("--absolute-threshold", train_args.cfg.absolute_em_threshold,
                   "Treat --threshold as absolute ELBO change instead of relative")
        ->capture_default_str();
    train_sc->add_option("--max-iters", train_args.cfg.max_em_iters, "EM iteration cap")
        ->capture_default_str();
    train_sc->add_option("--eta", train_args.cfg.smoothing_eta, "M-step smoothing pseudo-count")
        ->capture_default_str();
    train_sc->add_option("--seed", train_args.cfg.seed, "Initialization seed")
        ->capture_default_str();
    add_inference_flags(train_sc, train_args.cfg);
    train_sc->add_option("--index-out", train_args.index_out_path,
                         "Also write a retrieval index of the training corpus");
    train_sc->add_flag("--reuse-train-theta", train_args.reuse_train_theta,
                       "Reuse training-time gamma for --index-out instead of re-inferring");
    train_sc->add_option("--config", train_args.config_path,
                         "Read training flag defaults from a key=value file");

    QueryArgs query_args;
    CLI::App* retrieve_sc = app.add_subcommand("retrieve", "Rank indexed videos for a text query");
    retrieve_sc->add_option("--model", query_args.model_path, "Model file")->required();
    retrieve_sc->add_option("--query", query_args.query, "Free-text query")->required();
    retrieve_sc->add_option("--index", query_args.index_path, "Retrieval index file");
    retrieve_sc->add_option("--corpus", query_args.corpus_path,
                            "Corpus to index when --index is not given");
    retrieve_sc->add_option("--sensory-vocab", query_args.sensory_vocab_path,
                            "Sensory vocabulary (needed with --corpus)");
    retrieve_sc->add_option("--text-vocab", query_args.text_vocab_path, "Text vocabulary")
        ->required();
    retrieve_sc->add_option("--stopwords", query_args.stopwords_path,
                            "Stop-word file (default: built-in list)");
    retrieve_sc->add_option("--top", query_args.top_n, "Number of results")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    CLI::Option* retrieve_threshold =
        retrieve_sc->add_option("--threshold", query_args.threshold, "Minimum score to keep");
    retrieve_sc->add_option("--out", query_args.out_path, "Write TSV here instead of stdout");
    add_inference_flags(retrieve_sc, query_args.cfg);

    AnnotateArgs annotate_args;
    CLI::App* annotate_sc = app.add_subcommand("annotate", "Rank text words for each video");
    annotate_sc->add_option("--model", annotate_args.model_path, "Model file")->required();
    annotate_sc->add_option("--corpus", annotate_args.corpus_path, "Videos to annotate")
        ->required();
    annotate_sc->add_option("--sensory-vocab", annotate_args.sensory_vocab_path,
                            "Sensory vocabulary")
        ->required();
    annotate_sc->add_option("--text-vocab", annotate_args.text_vocab_path, "Text vocabulary")
        ->required();
    annotate_sc->add_option("--top", annotate_args.top_k, "Words per video")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    CLI::Option* annotate_threshold =
        annotate_sc->add_option("--threshold", annotate_args.threshold, "Minimum score to keep");
    annotate_sc->add_option("--out", annotate_args.out_path, "Write TSV here instead of stdout");
    add_inference_flags(annotate_sc, annotate_args.cfg);

    EvalRetrievalArgs evalr_args;
    CLI::App* evalr_sc =
        app.add_subcommand("eval-retrieval", "Precision/recall@k and MAP against judgments");
    evalr_sc->add_option("--model", evalr_args.model_path, "Model file")->required();
    evalr_sc->add_option("--judgments", evalr_args.judgments_path,
                         "JSON query -> relevant doc ids")
        ->required();
    evalr_sc->add_option("--index", evalr_args.index_path, "Retrieval index file");
    evalr_sc->add_option("--corpus", evalr_args.corpus_path,
                         "Corpus to index when --index is not given");
    evalr_sc->add_option("--sensory-vocab", evalr_args.sensory_vocab_path,
                         "Sensory vocabulary (needed with --corpus)");
    evalr_sc->add_option("--text-vocab", evalr_args.text_vocab_path, "Text vocabulary")
        ->required();
    evalr_sc->add_option("--stopwords", evalr_args.stopwords_path,
                         "Stop-word file (default: built-in list)");
    evalr_sc->add_option("--k", evalr_args.k, "Evaluation cutoff")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    evalr_sc->add_option("--pr-curves", evalr_args.pr_curves_dir,
                         "Directory for per-query precision-recall CSVs");
    evalr_sc->add_option("--out", evalr_args.out_path, "Write JSON here instead of stdout");
    add_inference_flags(evalr_sc, evalr_args.cfg);

    EvalAnnotationArgs evala_args;
    CLI::App* evala_sc =
        app.add_subcommand("eval-annotation", "Per-word precision/recall/F against captions");
    evala_sc->add_option("--model", evala_args.model_path, "Model file")->required();
    evala_sc->add_option("--corpus", evala_args.corpus_path, "Test corpus with truth captions")
        ->required();
    evala_sc->add_option("--sensory-vocab", evala_args.sensory_vocab_path, "Sensory vocabulary")
        ->required();
    evala_sc->add_option("--text-vocab", evala_args.text_vocab_path, "Text vocabulary")
        ->required();
    evala_sc->add_option("--top", evala_args.top_k, "Annotation words per video")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    evala_sc->add_option("--mc-samples", evala_args.mc_samples,
                         "Random annotation samples for the precision fallback")
        ->capture_default_str();
    evala_sc->add_option("--seed", evala_args.seed, "Seed for the random fallback")
        ->capture_default_str();
    evala_sc->add_option("--out", evala_args.out_path, "Write JSON here instead of stdout");
    add_inference_flags(evala_sc, evala_args.cfg);

    PerplexityArgs perp_args;
    CLI::App* perp_sc =
        app.add_subcommand("perplexity", "Caption perplexity over generated annotations");
    perp_sc->add_option("--model", perp_args.model_path, "Model file")->required();
    perp_sc->add_option("--corpus", perp_args.corpus_path, "Test corpus")->required();
    perp_sc->add_option("--sensory-vocab", perp_args.sensory_vocab_path, "Sensory vocabulary")
        ->required();
    perp_sc->add_option("--text-vocab", perp_args.text_vocab_path, "Text vocabulary")->required();
    perp_sc->add_option("--lengths", perp_args.lengths, "Annotation lengths to sweep")
        ->delimiter(',')
        ->capture_default_str();
    perp_sc->add_flag("--use-truth-captions", perp_args.use_truth_captions,
                      "Evaluate the corpus captions instead of generated annotations");
    perp_sc->add_option("--out", perp_args.out_path, "Write JSON here instead of stdout");
    add_inference_flags(perp_sc, perp_args.cfg);

    GenSyntheticArgs gen_args;
    CLI::App* gen_sc =
        app.add_subcommand("gen-synthetic", "Sample a ground-truth model and corpus");
    gen_sc->add_option("--topics", gen_args.topics, "Number of topics")->capture_default_str();
    gen_sc->add_option("--docs", gen_args.docs, "Number of documents")->required();
    gen_sc->add_option("--sensory-size", gen_args.sensory_size, "Sensory vocabulary size")
        ->capture_default_str();
    gen_sc->add_option("--text-size", gen_args.text_size, "Text vocabulary size")
        ->capture_default_str();
    gen_sc->add_option("--words-per-doc", gen_args.words_per_doc, "Sensory words per document")
        ->capture_default_str();
    gen_sc->add_option("--caption-len", gen_args.caption_len, "Caption words per document")
        ->capture_default_str();
    gen_sc->add_option("--alpha", gen_args.alpha, "Ground-truth Dirichlet prior")
        ->capture_default_str();
    gen_sc->add_option("--seed", gen_args.seed, "Sampling seed")->capture_default_str();
    gen_sc->add_flag("--separated", gen_args.separated,
                     "Give each topic a disjoint vocabulary block");
    gen_sc->add_option("--out-prefix", gen_args.out_prefix, "Prefix for the emitted files")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) {
            return 0;
        }
        Summary summary(app.get_subcommands().empty() ? "none"
                                                      : app.get_subcommands().front()->get_name());
        summary.add("status", std::string("error"));
        summary.add("exit", std::size_t{1});
        summary.emit();
        return 1;
    }

    query_args.has_threshold = retrieve_threshold->count() > 0;
    annotate_args.has_threshold = annotate_threshold->count() > 0;
    for (const CLI::Option* opt : train_sc->get_options()) {
        if (opt->count() > 0) train_args.given_flags.insert(opt->get_name());
    }

    const std::string subcommand = app.get_subcommands().front()->get_name();
    Summary summary(subcommand);
    const auto start = std::chrono::steady_clock::now();
    try {
        int rc = 0;
        if (train_sc->parsed()) {
            apply_train_config(train_args);
            rc = run_train(train_args, summary);
        } else if (retrieve_sc->parsed()) {
            rc = run_retrieve(query_args, summary);
        } else if (annotate_sc->parsed()) {
            rc = run_annotate(annotate_args, summary);
        } else if (evalr_sc->parsed()) {
            rc = run_eval_retrieval(evalr_args, summary);
        } else if (evala_sc->parsed()) {
            rc = run_eval_annotation(evala_args, summary);
        } else if (perp_sc->parsed()) {
            rc = run_perplexity(perp_args, summary);
        } else if (gen_sc->parsed()) {
            rc = run_gen_synthetic(gen_args, summary);
        }
        summary.add("status", std::string("ok"));
        summary.add("elapsed_s",
                    fmt6(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count()));
        summary.emit();
        return rc;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        summary.add("status", std::string("error"));
        summary.add("exit", std::size_t{1});
        summary.add("message", std::string(e.what()));
        summary.emit();
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        summary.add("status", std::string("error"));
        summary.add("exit", std::size_t{3});
        summary.add("message", std::string(e.what()));
        summary.emit();
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        summary.add("status", std::string("error"));
        summary.add("exit", std::size_t{2});
        summary.add("message", std::string(e.what()));
        summary.emit();
        return 2;
    }
}
