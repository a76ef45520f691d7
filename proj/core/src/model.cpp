#include "corrlda/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <zlib.h>

#include "corrlda/errors.hpp"
#include "corrlda/numerics.hpp"
#include "corrlda/rng.hpp"

namespace corrlda {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'D', 'A'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kRowSumTolerance = 1e-9;

void check_rows(const std::vector<double>& table, std::size_t rows, std::size_t cols,
                const char* name) {
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = table[r * cols + c];
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ValidationError(std::string(name) + " row " + std::to_string(r) +
                                      " has a non-positive entry at column " + std::to_string(c));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw ValidationError(std::string(name) + " row " + std::to_string(r) +
                                  " sums to " + std::to_string(sum) + ", expected 1");
        }
    }
}

void append_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f64(std::vector<std::uint8_t>& buf, double v) {
    append_u64(buf, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

double read_f64(const std::uint8_t* p) { return std::bit_cast<double>(read_u64(p)); }

// Everything that precedes the trailing CRC in the model file.
std::vector<std::uint8_t> serialize_payload(const ModelParams& params) {
    std::vector<std::uint8_t> buf;
    buf.reserve(4 + 4 + 3 * 8 + 8 + (params.pi().size() + params.beta().size()) * 8);
    for (char c : kMagic) buf.push_back(static_cast<std::uint8_t>(c));
    append_u32(buf, kFormatVersion);
    append_u64(buf, params.k());
    append_u64(buf, params.sensory_size());
    append_u64(buf, params.text_size());
    append_f64(buf, params.alpha());
    for (double v : params.pi()) append_f64(buf, v);
    for (double v : params.beta()) append_f64(buf, v);
    return buf;
}

std::uint32_t crc_of(const std::vector<std::uint8_t>& buf) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
}

} // namespace

ModelParams::ModelParams(std::size_t k, std::size_t sensory_size, std::size_t text_size,
                         double alpha, std::vector<double> pi, std::vector<double> beta)
    : k_(k),
      sensory_size_(sensory_size),
      text_size_(text_size),
      alpha_(alpha),
      pi_(std::move(pi)),
      beta_(std::move(beta)) {
    if (k_ == 0 || sensory_size_ == 0 || text_size_ == 0) {
        throw ValidationError("model dimensions must be positive");
    }
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
        throw ValidationError("alpha must be a positive finite real");
    }
    if (pi_.size() != k_ * sensory_size_) {
        throw ValidationError("pi table size does not match K x |S|");
    }
    if (beta_.size() != k_ * text_size_) {
        throw ValidationError("beta table size does not match K x |D|");
    }
    check_rows(pi_, k_, sensory_size_, "pi");
    check_rows(beta_, k_, text_size_, "beta");
}

ModelParams init_params(std::size_t k, std::size_t sensory_size, std::size_t text_size,
                        double alpha, std::uint64_t seed) {
    if (k == 0 || sensory_size == 0 || text_size == 0) {
        throw ValidationError("model dimensions must be positive");
    }
    if (!(alpha > 0.0)) {
        throw ValidationError("alpha must be positive");
    }
    Rng rng(seed);
    auto fill = [&rng](std::vector<double>& table, std::size_t rows, std::size_t cols) {
        for (std::size_t r = 0; r < rows; ++r) {
            std::span<double> row(table.data() + r * cols, cols);
            for (double& v : row) v = 1.0 + 0.1 * rng.next_double();
            normalize(row);
        }
    };
    std::vector<double> pi(k * sensory_size);
    std::vector<double> beta(k * text_size);
    fill(pi, k, sensory_size);
    fill(beta, k, text_size);
    return ModelParams(k, sensory_size, text_size, alpha, std::move(pi), std::move(beta));
}

std::pair<Document, LatentTrace> sample_document(const ModelParams& params, std::size_t m,
                                                 std::size_t n, std::uint64_t seed,
                                                 const std::string& id) {
    if (m == 0) {
        throw ValidationError("cannot sample a document with zero sensory words");
    }
    Rng rng(seed);
    LatentTrace trace;
    trace.theta.resize(params.k());
    rng.next_dirichlet(params.alpha(), trace.theta);

    std::vector<std::size_t> sensory_counts(params.sensory_size(), 0);
    trace.topics.reserve(m);
    for (std::size_t slot = 0; slot < m; ++slot) {
        const std::size_t z = rng.next_discrete(trace.theta);
        trace.topics.push_back(z);
        ++sensory_counts[rng.next_discrete(params.pi_row(z))];
    }

    Document doc;
    doc.id = id;
    trace.caption_sources.reserve(n);
    doc.caption.reserve(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
        const std::size_t y = rng.next_index(m);
        trace.caption_sources.push_back(y);
        doc.caption.push_back(rng.next_discrete(params.beta_row(trace.topics[y])));
    }

    std::vector<BowEntry> entries;
    for (std::size_t w = 0; w < sensory_counts.size(); ++w) {
        if (sensory_counts[w] > 0) entries.push_back({w, sensory_counts[w]});
    }
    doc.sensory = BowVector::from_entries(std::move(entries));
    return {std::move(doc), std::move(trace)};
}

double exact_log_likelihood(const ModelParams& params, const Document& doc) {
    doc.validate(params.sensory_size(), params.text_size());
    const std::size_t big_m = doc.sensory.total;
    const std::size_t n = doc.caption.size();
    const std::size_t k = params.k();

    const double budget = std::pow(static_cast<double>(k), static_cast<double>(big_m)) *
                          std::pow(static_cast<double>(big_m), static_cast<double>(n));
    if (!(budget <= 1e7)) {
        throw ValidationError("exact likelihood enumeration needs " + std::to_string(budget) +
                              " states, budget is 1e7");
    }

    // Expand the bag to per-slot words; slot order does not affect the sum.
    std::vector<std::size_t> slots;
    slots.reserve(big_m);
    for (const BowEntry& e : doc.sensory.entries) {
        for (std::size_t c = 0; c < e.count; ++c) slots.push_back(e.word);
    }

    std::vector<std::size_t> assignment(big_m, 0);
    std::vector<std::size_t> topic_counts(k, 0);
    const double log_inv_m = -std::log(static_cast<double>(big_m));
    double total = -std::numeric_limits<double>::infinity();
    while (true) {
        std::fill(topic_counts.begin(), topic_counts.end(), 0);
        double term = 0.0;
        for (std::size_t slot = 0; slot < big_m; ++slot) {
            const std::size_t z = assignment[slot];
            ++topic_counts[z];
            term += std::log(params.pi_row(z)[slots[slot]]);
        }
        term += log_dirichlet_moment(params.alpha(), topic_counts, big_m);
        for (std::size_t w : doc.caption) {
            double p = 0.0;
            for (std::size_t slot = 0; slot < big_m; ++slot) {
                p += params.beta_row(assignment[slot])[w];
            }
            term += std::log(p) + log_inv_m;
        }
        total = log_add(total, term);

        // Odometer increment over the K^M assignment space.
        std::size_t pos = 0;
        while (pos < big_m && ++assignment[pos] == k) {
            assignment[pos] = 0;
            ++pos;
        }
        if (pos == big_m) break;
    }
    return total;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
    std::vector<std::uint8_t> buf = serialize_payload(params);
    const std::uint32_t crc = crc_of(buf);
    append_u32(buf, crc);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write model file: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw ValidationError("failed writing model file: " + path.string());
    }
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open model file: " + path.string());
    }
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    constexpr std::size_t kHeaderSize = 4 + 4 + 3 * 8 + 8;
    if (buf.size() < kHeaderSize + 4) {
        throw ValidationError("model file too short: " + path.string());
    }
    if (std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw ValidationError("model file has wrong magic bytes: " + path.string());
    }
    const std::uint32_t version = read_u32(buf.data() + 4);
    if (version != kFormatVersion) {
        throw ValidationError("unsupported model format version " + std::to_string(version) +
                              ", expected " + std::to_string(kFormatVersion));
    }
    const std::uint64_t k = read_u64(buf.data() + 8);
    const std::uint64_t s = read_u64(buf.data() + 16);
    const std::uint64_t d = read_u64(buf.data() + 24);
    const double alpha = read_f64(buf.data() + 32);
    const std::size_t expected = kHeaderSize + (k * s + k * d) * 8 + 4;
    if (buf.size() != expected) {
        throw ValidationError("model file size " + std::to_string(buf.size()) +
                              " does not match header dimensions (expected " +
                              std::to_string(expected) + ")");
    }
    const std::uint32_t stored_crc = read_u32(buf.data() + buf.size() - 4);
    const std::uint32_t computed_crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size() - 4)));
    if (stored_crc != computed_crc) {
        throw ValidationError("model file checksum mismatch: " + path.string());
    }
    std::vector<double> pi(k * s);
    std::vector<double> beta(k * d);
    const std::uint8_t* p = buf.data() + kHeaderSize;
    for (double& v : pi) {
        v = read_f64(p);
        p += 8;
    }
    for (double& v : beta) {
        v = read_f64(p);
        p += 8;
    }
    return ModelParams(k, s, d, alpha, std::move(pi), std::move(beta));
}

std::uint32_t params_digest(const ModelParams& params) {
    return crc_of(serialize_payload(params));
}

} // namespace corrlda
