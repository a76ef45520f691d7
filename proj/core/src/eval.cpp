#include "corrlda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "corrlda/annotation.hpp"
#include "corrlda/errors.hpp"
#include "corrlda/rng.hpp"

namespace corrlda {

namespace {

std::size_t hits_in_top(const RankedList& results, const std::set<std::string>& relevant,
                        std::size_t k) {
    std::size_t hits = 0;
    const std::size_t limit = std::min(k, results.items.size());
    for (std::size_t r = 0; r < limit; ++r) {
        if (relevant.count(results.items[r].id) != 0) ++hits;
    }
    return hits;
}

// One random annotation assignment: a distinct word set of the given size
// per document, drawn by rejection sampling.
std::vector<std::set<std::size_t>> random_assignment(std::size_t docs, std::size_t set_size,
                                                     std::size_t d_size, Rng& rng) {
    std::vector<std::set<std::size_t>> assignment(docs);
    for (auto& words : assignment) {
        while (words.size() < set_size) {
            words.insert(rng.next_index(d_size));
        }
    }
    return assignment;
}

} // namespace

RelevanceJudgments load_judgments(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open judgments file: " + path.string());
    }
    nlohmann::json obj;
    try {
        in >> obj;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("judgments file: " + std::string(e.what()));
    }
    if (!obj.is_object()) {
        throw ValidationError("judgments file must be a JSON object mapping query to doc ids");
    }
    RelevanceJudgments judgments;
    for (const auto& [query, ids] : obj.items()) {
        if (!ids.is_array() || ids.empty()) {
            throw ValidationError("judgments for query '" + query +
                                  "' must be a nonempty array of doc ids");
        }
        std::set<std::string>& set = judgments[query];
        for (const auto& id : ids) {
            if (!id.is_string()) {
                throw ValidationError("judgments for query '" + query +
                                      "' must contain only strings");
            }
            set.insert(id.get<std::string>());
        }
    }
    return judgments;
}

double perplexity(const std::vector<Document>& docs, const ModelParams& params,
                  const TrainConfig& cfg) {
    if (docs.empty()) {
        throw ValidationError("perplexity needs at least one document");
    }
    double log_sum = 0.0;
    std::size_t words = 0;
    for (const Document& doc : docs) {
        if (doc.caption.empty()) {
            throw ValidationError("document '" + doc.id + "' has an empty caption");
        }
        const std::vector<double> theta = infer_theta(doc.sensory, params, cfg);
        const std::vector<double> scores = annotation_scores(theta, params);
        for (std::size_t w : doc.caption) {
            if (w >= scores.size()) {
                throw ValidationError("document '" + doc.id + "': caption index " +
                                      std::to_string(w) + " out of range");
            }
            log_sum += std::log(scores[w]);
            ++words;
        }
    }
    return std::exp(-log_sum / static_cast<double>(words));
}

std::map<std::size_t, double> perplexity_sweep(const Corpus& test, const ModelParams& params,
                                               const TrainConfig& cfg,
                                               const std::vector<std::size_t>& lengths) {
    if (test.size() == 0) {
        throw ValidationError("perplexity sweep needs at least one document");
    }
    if (lengths.empty()) {
        throw ValidationError("perplexity sweep needs at least one annotation length");
    }
    std::size_t max_len = 0;
    for (std::size_t len : lengths) {
        if (len == 0) {
            throw ValidationError("annotation lengths must be positive");
        }
        if (len > params.text_size()) {
            throw ValidationError("annotation length " + std::to_string(len) +
                                  " exceeds the text vocabulary size " +
                                  std::to_string(params.text_size()));
        }
        max_len = std::max(max_len, len);
    }

    // Cumulative log score of each document's ranked annotation prefix;
    // every requested length reads from the same ranking.
    std::vector<std::vector<double>> prefix_log(test.size());
    for (std::size_t d = 0; d < test.size(); ++d) {
        const Annotation ann =
            annotate(test.doc(d).sensory, params, cfg, max_len, std::nullopt, test.doc(d).id);
        std::vector<double>& pref = prefix_log[d];
        pref.resize(max_len + 1, 0.0);
        for (std::size_t m = 0; m < max_len; ++m) {
            pref[m + 1] = pref[m] + std::log(ann.words[m].score);
        }
    }

    std::map<std::size_t, double> result;
    for (std::size_t len : lengths) {
        double log_sum = 0.0;
        for (const std::vector<double>& pref : prefix_log) {
            log_sum += pref[len];
        }
        result[len] = std::exp(-log_sum / static_cast<double>(len * test.size()));
    }
    return result;
}

std::pair<double, double> precision_recall_at_k(const RankedList& results,
                                                const std::set<std::string>& relevant,
                                                std::size_t k) {
    if (k == 0) {
        throw ValidationError("k must be at least 1");
    }
    if (relevant.empty()) {
        throw ValidationError("relevant set must be nonempty");
    }
    const auto hits = static_cast<double>(hits_in_top(results, relevant, k));
    return {hits / static_cast<double>(k), hits / static_cast<double>(relevant.size())};
}

double average_precision_at_k(const RankedList& results, const std::set<std::string>& relevant,
                              std::size_t k) {
    if (k == 0) {
        throw ValidationError("k must be at least 1");
    }
    if (relevant.empty()) {
        throw ValidationError("relevant set must be nonempty");
    }
    std::size_t hits = 0;
    double sum = 0.0;
    const std::size_t limit = std::min(k, results.items.size());
    for (std::size_t r = 0; r < limit; ++r) {
        if (relevant.count(results.items[r].id) != 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

double map_at_k(const std::map<std::string, RankedList>& per_query_results,
                const RelevanceJudgments& judgments, std::size_t k) {
    if (per_query_results.empty()) {
        throw ValidationError("MAP needs at least one query");
    }
    double sum = 0.0;
    for (const auto& [query, results] : per_query_results) {
        const auto it = judgments.find(query);
        if (it == judgments.end()) {
            throw ValidationError("no relevance judgments for query '" + query + "'");
        }
        sum += average_precision_at_k(results, it->second, k);
    }
    return sum / static_cast<double>(per_query_results.size());
}

PerWordMetrics per_word_metrics(const std::map<std::string, std::set<std::size_t>>& annotations,
                                const std::map<std::string, std::set<std::size_t>>& truth,
                                std::size_t d_size, std::size_t mc_samples, std::uint64_t seed) {
    if (mc_samples == 0) {
        throw ValidationError("mc_samples must be at least 1");
    }
    if (d_size == 0) {
        throw ValidationError("text vocabulary size must be positive");
    }
    const std::size_t max_set = std::min<std::size_t>(10, d_size);
    for (const auto& [id, words] : annotations) {
        if (words.size() > max_set) {
            throw ValidationError("annotation set for '" + id + "' has " +
                                  std::to_string(words.size()) + " words, protocol allows " +
                                  std::to_string(max_set));
        }
        for (std::size_t w : words) {
            if (w >= d_size) {
                throw ValidationError("annotation for '" + id + "' references word " +
                                      std::to_string(w) + " outside the vocabulary");
            }
        }
    }

    // Only words that appear in some truth set are scored.
    std::set<std::size_t> truth_words;
    for (const auto& [id, words] : truth) {
        for (std::size_t w : words) {
            if (w >= d_size) {
                throw ValidationError("truth annotation for '" + id + "' references word " +
                                      std::to_string(w) + " outside the vocabulary");
            }
            truth_words.insert(w);
        }
    }
    PerWordMetrics metrics;
    if (truth_words.empty()) {
        return metrics;
    }

    auto truth_has = [&truth](const std::string& id, std::size_t w) {
        const auto it = truth.find(id);
        return it != truth.end() && it->second.count(w) != 0;
    };

    // The random assignments are generated lazily and shared by every
    // fallback word, so the estimate is deterministic for a fixed seed no
    // matter how many words need it.
    std::vector<std::vector<std::set<std::size_t>>> mc_assignments;
    std::vector<std::string> doc_order;
    doc_order.reserve(annotations.size());
    for (const auto& [id, words] : annotations) doc_order.push_back(id);
    auto ensure_mc = [&]() {
        if (!mc_assignments.empty()) return;
        Rng rng(seed);
        mc_assignments.reserve(mc_samples);
        for (std::size_t s = 0; s < mc_samples; ++s) {
            mc_assignments.push_back(random_assignment(doc_order.size(), max_set, d_size, rng));
        }
    };

    double precision_sum = 0.0;
    double recall_sum = 0.0;
    for (std::size_t w : truth_words) {
        std::size_t truth_docs = 0;
        std::size_t annotated_docs = 0;
        std::size_t both = 0;
        for (const auto& [id, words] : truth) {
            if (words.count(w) != 0) ++truth_docs;
        }
        for (const auto& [id, words] : annotations) {
            if (words.count(w) != 0) {
                ++annotated_docs;
                if (truth_has(id, w)) ++both;
            }
        }
        recall_sum += static_cast<double>(both) / static_cast<double>(truth_docs);

        if (annotated_docs > 0) {
            precision_sum += static_cast<double>(both) / static_cast<double>(annotated_docs);
        } else {
            ensure_mc();
            ++metrics.monte_carlo_words;
            double estimate = 0.0;
            std::size_t used = 0;
            for (const auto& assignment : mc_assignments) {
                std::size_t denom = 0;
                std::size_t num = 0;
                for (std::size_t d = 0; d < doc_order.size(); ++d) {
                    if (assignment[d].count(w) != 0) {
                        ++denom;
                        if (truth_has(doc_order[d], w)) ++num;
                    }
                }
                if (denom == 0) continue;
                estimate += static_cast<double>(num) / static_cast<double>(denom);
                ++used;
            }
            if (used > 0) precision_sum += estimate / static_cast<double>(used);
        }
    }

    metrics.words_evaluated = truth_words.size();
    metrics.precision = precision_sum / static_cast<double>(truth_words.size());
    metrics.recall = recall_sum / static_cast<double>(truth_words.size());
    if (metrics.precision + metrics.recall > 0.0) {
        metrics.f_score = 2.0 * metrics.precision * metrics.recall /
                          (metrics.precision + metrics.recall);
    }
    return metrics;
}

std::vector<PrPoint> pr_curve(const RankedList& results, const std::set<std::string>& relevant) {
    if (results.items.empty()) {
        throw ValidationError("precision-recall curve needs a nonempty ranking");
    }
    if (relevant.empty()) {
        throw ValidationError("relevant set must be nonempty");
    }
    std::vector<PrPoint> points;
    points.reserve(results.items.size());
    std::size_t hits = 0;
    for (std::size_t r = 0; r < results.items.size(); ++r) {
        if (relevant.count(results.items[r].id) != 0) ++hits;
        points.push_back({r + 1, static_cast<double>(hits) / static_cast<double>(relevant.size()),
                          static_cast<double>(hits) / static_cast<double>(r + 1)});
    }
    return points;
}

} // namespace corrlda
