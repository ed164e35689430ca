#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "elr/random.hpp"
#include "elr/rerank.hpp"
#include "elr/text.hpp"

namespace elr {

using nlohmann::json;

std::string_view to_string(PairLabel label) { return label == PairLabel::positive ? "pos" : "neg"; }

std::string_view to_string(SourceDataset source) { return source == SourceDataset::hotpotqa ? "hotpotqa" : "nq"; }

std::size_t TrainingExport::positives() const
{
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.label == PairLabel::positive; }));
}

std::size_t TrainingExport::negatives() const { return pairs.size() - positives(); }

namespace {

std::string tsv_field(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        if (c == '\t' || c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return out;
}

}  // namespace

void TrainingExport::write_tsv(std::ostream& out) const
{
    out << "#recipe=" << to_string(recipe) << "\tseed=" << seed << "\tpairs=" << pairs.size()
        << "\tpositives=" << positives() << "\tnegatives=" << negatives() << '\n';
    for (const auto& p : pairs) {
        out << tsv_field(p.question) << '\t' << tsv_field(p.context) << '\t' << to_string(p.label) << '\t'
            << to_string(p.source) << '\n';
    }
}

TrainingExport export_hotpot_pairs(std::span<const HotpotRecord> records, std::uint64_t seed)
{
    TrainingExport ex;
    ex.seed = seed;
    ex.recipe = SourceDataset::hotpotqa;
    Rng rng(seed);

    struct PoolEntry {
        std::size_t record;
        const std::string* sentence;
    };
    std::vector<PoolEntry> global;
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (const auto& s : records[r].non_supporting) {
            if (!text::trim(s).empty()) {
                global.push_back({r, &s});
            }
        }
    }

    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        std::vector<std::string> positives;
        for (const auto& s : rec.supporting) {
            if (auto t = text::trim(s); !t.empty()) {
                positives.push_back(std::move(t));
            }
        }
        std::vector<std::string> local;
        for (const auto& s : rec.non_supporting) {
            if (auto t = text::trim(s); !t.empty()) {
                local.push_back(std::move(t));
            }
        }

        std::vector<std::string> negatives;
        for (auto i : rng.sample_indices(local.size(), positives.size())) {
            negatives.push_back(local[i]);
        }
        if (negatives.size() < positives.size()) {
            const auto shortfall = positives.size() - negatives.size();
            std::size_t foreign = global.size() - local.size();
            if (foreign == 0) {
                ex.warnings.push_back("hotpot record " + std::to_string(r) + ": no negative pool; dropped " +
                                      std::to_string(shortfall) + " positive(s) to keep the export balanced");
                positives.resize(negatives.size());
            } else {
                ex.warnings.push_back("hotpot record " + std::to_string(r) + ": " + std::to_string(shortfall) +
                                      " negative(s) drawn from the global pool");
                while (negatives.size() < positives.size()) {
                    const auto& e = global[rng.below(global.size())];
                    if (e.record != r) {
                        negatives.push_back(text::trim(*e.sentence));
                    }
                }
            }
        }
        for (auto& p : positives) {
            ex.pairs.push_back({rec.question, std::move(p), PairLabel::positive, SourceDataset::hotpotqa});
        }
        for (auto& n : negatives) {
            ex.pairs.push_back({rec.question, std::move(n), PairLabel::negative, SourceDataset::hotpotqa});
        }
    }
    return ex;
}

TrainingExport export_nq_pairs(std::span<const NqRecord> records, std::size_t target_size, std::uint64_t seed)
{
    if (target_size % 2 != 0) {
        throw std::invalid_argument("nq export size must be even to stay label-balanced (got " +
                                    std::to_string(target_size) + ")");
    }
    TrainingExport ex;
    ex.seed = seed;
    ex.recipe = SourceDataset::nq;
    Rng rng(seed);

    std::vector<std::size_t> eligible;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        auto nonempty = [](const auto& v) {
            return std::any_of(v.begin(), v.end(), [](const auto& s) { return !text::trim(s).empty(); });
        };
        if (nonempty(rec.positives) && nonempty(rec.hard_negatives)) {
            eligible.push_back(r);
        }
    }
    const std::size_t available = 2 * eligible.size();
    std::vector<std::size_t> chosen;
    if (target_size > available) {
        ex.warnings.push_back("nq export: requested " + std::to_string(target_size) + " pairs but only " +
                              std::to_string(available) + " available; exporting all");
        chosen = eligible;
    } else {
        for (auto i : rng.sample_indices(eligible.size(), target_size / 2)) {
            chosen.push_back(eligible[i]);
        }
        std::sort(chosen.begin(), chosen.end());
    }

    auto pick = [&](const std::vector<std::string>& pool) {
        std::vector<const std::string*> usable;
        for (const auto& s : pool) {
            if (!text::trim(s).empty()) {
                usable.push_back(&s);
            }
        }
        return text::trim(*usable[rng.below(usable.size())]);
    };
    for (auto r : chosen) {
        const auto& rec = records[r];
        ex.pairs.push_back({rec.question, pick(rec.positives), PairLabel::positive, SourceDataset::nq});
        ex.pairs.push_back({rec.question, pick(rec.hard_negatives), PairLabel::negative, SourceDataset::nq});
    }
    return ex;
}

namespace {

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace

std::vector<HotpotRecord> load_hotpot_training(const std::filesystem::path& path)
{
    auto doc = read_json_file(path);
    if (!doc.is_array()) {
        throw std::runtime_error(path.string() + ": expected a JSON array of HotpotQA records");
    }
    std::vector<HotpotRecord> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        try {
            HotpotRecord r;
            r.question = rec.at("question").get<std::string>();
            std::set<std::pair<std::string, int>> support;
            for (const auto& f : rec.at("supporting_facts")) {
                support.emplace(f.at(0).get<std::string>(), f.at(1).get<int>());
            }
            for (const auto& para : rec.at("context")) {
                auto title = para.at(0).get<std::string>();
                const auto& sentences = para.at(1);
                for (std::size_t s = 0; s < sentences.size(); ++s) {
                    auto sentence = sentences[s].get<std::string>();
                    if (support.contains({title, static_cast<int>(s)})) {
                        r.supporting.push_back(std::move(sentence));
                    } else {
                        r.non_supporting.push_back(std::move(sentence));
                    }
                }
            }
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ": record " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

std::vector<NqRecord> load_nq_training(const std::filesystem::path& path)
{
    auto doc = read_json_file(path);
    if (!doc.is_array()) {
        throw std::runtime_error(path.string() + ": expected a JSON array of DPR records");
    }
    auto texts = [](const json& ctxs) {
        std::vector<std::string> out;
        if (ctxs.is_array()) {
            for (const auto& c : ctxs) {
                out.push_back(c.at("text").get<std::string>());
            }
        }
        return out;
    };
    std::vector<NqRecord> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        try {
            NqRecord r;
            r.question = rec.at("question").get<std::string>();
            r.positives = texts(rec.value("positive_ctxs", json::array()));
            r.hard_negatives = texts(rec.value("hard_negative_ctxs", json::array()));
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ": record " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

std::size_t read_export_size(const std::filesystem::path& path)
{
    std::ifstream in(path);
    std::string header;
    if (!in || !std::getline(in, header)) {
        throw std::runtime_error("cannot read export header from " + path.string());
    }
    auto pos = header.find("pairs=");
    if (header.rfind("#recipe=", 0) != 0 || pos == std::string::npos) {
        throw std::runtime_error(path.string() + " is not a training export");
    }
    return std::stoull(header.substr(pos + 6));
}

}  // namespace elr
