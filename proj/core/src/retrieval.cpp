#include "corrlda/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "corrlda/errors.hpp"
#include "corrlda/parallel.hpp"

namespace corrlda {

namespace {

constexpr const char* kIndexFormat = "corrlda-index-v1";

std::string digest_hex(std::uint32_t digest) {
    char buf[9];
    std::snprintf(buf, sizeof(buf), "%08x", digest);
    return std::string(buf);
}

void check_theta(std::span<const double> theta, std::size_t k, const std::string& context) {
    if (theta.size() != k) {
        throw ValidationError(context + ": theta has length " + std::to_string(theta.size()) +
                              ", expected " + std::to_string(k));
    }
    double sum = 0.0;
    for (double t : theta) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw ValidationError(context + ": theta entries must be finite and non-negative");
        }
        sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError(context + ": theta sums to " + std::to_string(sum) +
                              ", expected 1");
    }
}

void sort_ranked(std::vector<ScoredId>& items) {
    std::sort(items.begin(), items.end(), [](const ScoredId& a, const ScoredId& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

} // namespace

RetrievalIndex build_index(const Corpus& corpus, const ModelParams& params,
                           const TrainConfig& cfg,
                           const std::vector<VariationalState>* train_states) {
    if (corpus.size() == 0) {
        throw ValidationError("cannot build an index from an empty corpus");
    }
    if (corpus.sensory_vocab().size() != params.sensory_size() ||
        corpus.text_vocab().size() != params.text_size()) {
        throw ValidationError("corpus vocabularies do not match model dimensions");
    }
    if (train_states && train_states->size() != corpus.size()) {
        throw ValidationError("expected one training state per document for theta reuse");
    }

    RetrievalIndex index;
    index.k = params.k();
    index.model_digest = params_digest(params);
    index.entries.resize(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t d = lo; d < hi; ++d) {
            const Document& doc = corpus.doc(d);
            IndexEntry& entry = index.entries[d];
            entry.id = doc.id;
            entry.category = doc.category;
            if (train_states) {
                const VariationalState& state = (*train_states)[d];
                if (state.k != params.k()) {
                    throw ValidationError("training state for document '" + doc.id +
                                          "' does not match the model's topic count");
                }
                double sum = 0.0;
                for (double g : state.gamma) sum += g;
                entry.theta.resize(state.k);
                for (std::size_t j = 0; j < state.k; ++j) entry.theta[j] = state.gamma[j] / sum;
            } else {
                entry.theta = infer_theta(doc.sensory, params, cfg);
            }
        }
    });
    return index;
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write index file: " + path.string());
    }
    nlohmann::ordered_json header;
    header["format"] = kIndexFormat;
    header["k"] = index.k;
    header["model_digest"] = digest_hex(index.model_digest);
    out << header.dump() << '\n';
    for (const IndexEntry& entry : index.entries) {
        nlohmann::ordered_json obj;
        obj["id"] = entry.id;
        obj["theta"] = entry.theta;
        if (entry.category) {
            obj["category"] = *entry.category;
        } else {
            obj["category"] = nullptr;
        }
        out << obj.dump() << '\n';
    }
    if (!out) {
        throw ValidationError("failed writing index file: " + path.string());
    }
}

RetrievalIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open index file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("index file is empty: " + path.string());
    }
    RetrievalIndex index;
    try {
        const auto header = nlohmann::json::parse(line);
        if (!header.is_object() || header.value("format", "") != kIndexFormat) {
            throw ValidationError("index file has an unrecognized header: " + path.string());
        }
        index.k = header.at("k").get<std::size_t>();
        const auto digest = header.at("model_digest").get<std::string>();
        index.model_digest = static_cast<std::uint32_t>(std::stoul(digest, nullptr, 16));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("index header: " + std::string(e.what()));
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        IndexEntry entry;
        try {
            const auto obj = nlohmann::json::parse(line);
            entry.id = obj.at("id").get<std::string>();
            entry.theta = obj.at("theta").get<std::vector<double>>();
            const auto& cat = obj.at("category");
            if (cat.is_string()) entry.category = cat.get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("index line " + std::to_string(line_no) + ": " + e.what());
        }
        check_theta(entry.theta, index.k, "index entry '" + entry.id + "'");
        index.entries.push_back(std::move(entry));
    }
    return index;
}

double query_word_probability(std::span<const double> theta, const ModelParams& params,
                              std::size_t word) {
    if (word >= params.text_size()) {
        throw ValidationError("query word index " + std::to_string(word) +
                              " out of range for vocabulary of size " +
                              std::to_string(params.text_size()));
    }
    double p = 0.0;
    for (std::size_t j = 0; j < params.k(); ++j) {
        p += theta[j] * params.beta_row(j)[word];
    }
    return p;
}

double score_video(std::span<const std::size_t> query_indices, std::span<const double> theta,
                   const ModelParams& params) {
    if (query_indices.empty()) {
        throw EmptyQueryError("cannot score an empty query");
    }
    check_theta(theta, params.k(), "score_video");
    std::vector<std::size_t> sorted(query_indices.begin(), query_indices.end());
    std::sort(sorted.begin(), sorted.end());
    double log_score = 0.0;
    for (std::size_t word : sorted) {
        log_score += std::log(query_word_probability(theta, params, word));
    }
    return std::exp(log_score);
}

RetrievalResult retrieve(const std::string& query, const RetrievalIndex& index,
                         const ModelParams& params, const Vocabulary& text_vocab,
                         const StopwordSet& stopwords, std::size_t top_n,
                         std::optional<double> threshold) {
    if (top_n == 0) {
        throw ValidationError("top_n must be at least 1");
    }
    if (index.k != params.k()) {
        throw ValidationError("index was built for " + std::to_string(index.k) +
                              " topics, model has " + std::to_string(params.k()));
    }
    if (index.model_digest != params_digest(params)) {
        throw ValidationError("index digest does not match the supplied model");
    }
    TokenizeResult tokens = tokenize_caption(query, text_vocab, stopwords);
    if (tokens.indices.empty()) {
        throw EmptyQueryError("query is empty after stop-word and vocabulary filtering");
    }

    RetrievalResult result;
    result.oov_tokens = std::move(tokens.oov_tokens);
    result.stopword_count = tokens.stopword_count;
    result.ranked.items.reserve(index.entries.size());
    for (const IndexEntry& entry : index.entries) {
        result.ranked.items.push_back(
            {entry.id, score_video(tokens.indices, entry.theta, params)});
    }
    sort_ranked(result.ranked.items);
    if (result.ranked.items.size() > top_n) {
        result.ranked.items.resize(top_n);
    }
    if (threshold) {
        std::erase_if(result.ranked.items,
                      [&](const ScoredId& s) { return s.score < *threshold; });
    }
    return result;
}

} // namespace corrlda
