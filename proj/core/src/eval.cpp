#include "elr/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include "elr/providers.hpp"
#include "elr/rerank.hpp"
#include "elr/text.hpp"

namespace elr {

using nlohmann::json;

std::string normalize_answer(std::string_view s)
{
    std::string cleaned;
    cleaned.reserve(s.size());
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && std::ispunct(c)) {
            continue;
        }
        cleaned.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    }
    std::string out;
    for (auto w : text::split_words(cleaned)) {
        if (w == "a" || w == "an" || w == "the") {
            continue;
        }
        if (!out.empty()) {
            out.push_back(' ');
        }
        out.append(w);
    }
    return out;
}

namespace {

std::vector<std::string> normalized_tokens(std::string_view s)
{
    auto norm = normalize_answer(s);
    std::vector<std::string> out;
    for (auto w : text::split_words(norm)) {
        out.emplace_back(w);
    }
    return out;
}

bool contains_tokens(const std::vector<std::string>& passage, const std::vector<std::string>& answer)
{
    return !answer.empty() && std::search(passage.begin(), passage.end(), answer.begin(), answer.end()) != passage.end();
}

std::string format_pct(double v)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << 100.0 * v;
    return os.str();
}

}  // namespace

bool contains_answer(std::span<const std::string> passages, std::span<const std::string> answers)
{
    std::vector<std::vector<std::string>> normalized_answers;
    for (const auto& a : answers) {
        if (auto toks = normalized_tokens(a); !toks.empty()) {
            normalized_answers.push_back(std::move(toks));
        }
    }
    if (normalized_answers.empty()) {
        return false;
    }
    for (const auto& p : passages) {
        auto toks = normalized_tokens(p);
        for (const auto& a : normalized_answers) {
            if (contains_tokens(toks, a)) {
                return true;
            }
        }
    }
    return false;
}

YesNoFilterResult filter_yes_no(std::vector<EvalQuestion> questions)
{
    YesNoFilterResult r;
    for (auto& q : questions) {
        bool boolean = q.answer_type == AnswerType::boolean;
        if (!boolean && q.answers.size() == 1) {
            auto a = normalize_answer(q.answers.front());
            boolean = a == "yes" || a == "no";
        }
        if (boolean) {
            ++r.removed;
        } else {
            r.kept.push_back(std::move(q));
        }
    }
    if (r.kept.empty() && r.removed > 0) {
        r.warnings.push_back("filter_yes_no: every question was yes/no; nothing left to evaluate");
    }
    return r;
}

// --- run files --------------------------------------------------------------

std::vector<RunEntry> read_run_file(std::istream& in)
{
    std::vector<RunEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::split_words(line).empty()) {
            continue;
        }
        try {
            auto j = json::parse(line);
            RunEntry e;
            e.qid = j.value("qid", "");
            e.query = j.value("query", "");
            e.config_fingerprint = j.value("config_fingerprint", "");
            if (auto it = j.find("final"); it != j.end()) {
                for (const auto& p : *it) {
                    e.texts.push_back(p.at("text").get<std::string>());
                }
            } else if (auto pit = j.find("passages"); pit != j.end()) {
                e.texts = pit->get<std::vector<std::string>>();
            } else {
                throw std::runtime_error("record has neither \"final\" nor \"passages\"");
            }
            out.push_back(std::move(e));
        } catch (const std::exception& e) {
            throw std::runtime_error("run file line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<RunEntry> read_run_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open run file: " + path.string());
    }
    return read_run_file(in);
}

namespace {

class RunLookup {
  public:
    explicit RunLookup(std::span<const RunEntry> run)
    {
        for (const auto& e : run) {
            if (!e.qid.empty()) {
                by_qid_.emplace(e.qid, &e);
            }
            by_query_.emplace(e.query, &e);
            if (!e.config_fingerprint.empty()) {
                fingerprints_.insert(e.config_fingerprint);
            }
        }
    }

    const RunEntry* find(const EvalQuestion& q) const
    {
        if (auto it = by_qid_.find(q.qid); !q.qid.empty() && it != by_qid_.end()) {
            return it->second;
        }
        if (auto it = by_query_.find(q.question); it != by_query_.end()) {
            return it->second;
        }
        return nullptr;
    }

    std::string fingerprint() const
    {
        std::string out;
        for (const auto& f : fingerprints_) {
            out += out.empty() ? f : "," + f;
        }
        return out;
    }

  private:
    std::unordered_map<std::string, const RunEntry*> by_qid_;
    std::unordered_map<std::string, const RunEntry*> by_query_;
    std::set<std::string> fingerprints_;
};

}  // namespace

MetricReport recall_at_k(std::span<const RunEntry> run, std::span<const EvalQuestion> questions,
                         std::span<const int> ks, std::string dataset)
{
    if (ks.empty()) {
        throw std::invalid_argument("recall_at_k: at least one K is required");
    }
    for (int k : ks) {
        if (k < 1) {
            throw std::invalid_argument("recall_at_k: K must be >= 1");
        }
    }
    MetricReport report;
    report.dataset = std::move(dataset);
    report.n_questions = questions.size();
    RunLookup lookup(run);
    report.config_fingerprint = lookup.fingerprint();

    std::size_t missing = 0;
    for (const auto& q : questions) {
        QuestionResult r;
        r.qid = q.qid;
        if (const auto* e = lookup.find(q)) {
            for (std::size_t i = 0; i < e->texts.size(); ++i) {
                if (contains_answer(std::span(&e->texts[i], 1), q.answers)) {
                    r.first_hit_rank = i + 1;
                    break;
                }
            }
        } else {
            ++missing;
        }
        report.per_question.push_back(std::move(r));
    }
    if (missing > 0) {
        report.warnings.push_back(std::to_string(missing) + " question(s) have no run entry; counted as misses");
    }
    for (int k : ks) {
        std::size_t hits = 0;
        for (const auto& r : report.per_question) {
            if (r.first_hit_rank && *r.first_hit_rank <= static_cast<std::size_t>(k)) {
                ++hits;
            }
        }
        report.recall_at[k] = questions.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(questions.size());
    }
    if (questions.empty()) {
        report.warnings.push_back("no questions to evaluate");
    }
    return report;
}

// --- boolean answering -------------------------------------------------------

bool KeywordAnswerer::answer(std::string_view question, std::span<const std::string> contexts)
{
    double best = 0.0;
    for (const auto& c : contexts) {
        best = std::max(best, LexicalScorer::score(question, c));
    }
    return best >= threshold_;
}

bool RemoteAnswerer::answer(std::string_view question, std::span<const std::string> contexts)
{
    json request{{"op", "answer"}, {"text", question}, {"contexts", std::vector<std::string>(contexts.begin(), contexts.end())}};
    json response;
    try {
        response = call_with_retries(*transport_, request, retries_);
    } catch (const TransportError& e) {
        throw ProviderError(e.what());
    }
    if (!response.is_object()) {
        throw ProviderError("answer response is not a JSON object");
    }
    if (auto it = response.find("error"); it != response.end()) {
        throw ProviderError("provider error: " + it->dump());
    }
    auto it = response.find("answer");
    if (it != response.end() && it->is_boolean()) {
        return it->get<bool>();
    }
    if (it != response.end() && it->is_string()) {
        auto a = normalize_answer(it->get<std::string>());
        if (a == "yes" || a == "no") {
            return a == "yes";
        }
    }
    throw ProviderError("answer response lacks a yes/no \"answer\"");
}

MetricReport boolean_accuracy(std::span<const RunEntry> run, std::span<const EvalQuestion> questions,
                              YesNoAnswerer& answerer, std::size_t k, std::string dataset)
{
    if (k == 0) {
        throw std::invalid_argument("boolean_accuracy: k must be >= 1");
    }
    MetricReport report;
    report.dataset = std::move(dataset);
    RunLookup lookup(run);
    report.config_fingerprint = lookup.fingerprint();

    std::size_t correct = 0;
    std::size_t skipped = 0;
    std::size_t failures = 0;
    for (const auto& q : questions) {
        if (!q.gold_bool) {
            ++skipped;
            continue;
        }
        QuestionResult r;
        r.qid = q.qid;
        std::vector<std::string> contexts;
        if (const auto* e = lookup.find(q)) {
            auto n = std::min(k, e->texts.size());
            contexts.assign(e->texts.begin(), e->texts.begin() + static_cast<std::ptrdiff_t>(n));
        }
        try {
            r.predicted = answerer.answer(q.question, contexts);
            r.correct = *r.predicted == *q.gold_bool;
        } catch (const std::exception& e) {
            ++failures;
            if (failures <= 5) {
                report.warnings.push_back("answerer failed on " + q.qid + ": " + e.what() + "; counted incorrect");
            }
        }
        correct += r.correct ? 1 : 0;
        report.per_question.push_back(std::move(r));
    }
    if (failures > 5) {
        report.warnings.push_back(std::to_string(failures) + " answerer failures in total");
    }
    if (skipped > 0) {
        report.warnings.push_back(std::to_string(skipped) + " question(s) without a yes/no gold label skipped");
    }
    report.n_questions = report.per_question.size();
    report.accuracy = report.n_questions == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(report.n_questions);
    return report;
}

// --- reports ----------------------------------------------------------------

json MetricReport::to_json() const
{
    json recall = json::object();
    for (const auto& [k, v] : recall_at) {
        recall[std::to_string(k)] = v;
    }
    json per = json::array();
    for (const auto& r : per_question) {
        json e{{"qid", r.qid}};
        e["first_hit"] = r.first_hit_rank ? json(*r.first_hit_rank) : json(nullptr);
        if (r.predicted) {
            e["predicted"] = *r.predicted ? "yes" : "no";
            e["correct"] = r.correct;
        }
        per.push_back(std::move(e));
    }
    return {{"dataset", dataset},
            {"n_questions", n_questions},
            {"recall_at", std::move(recall)},
            {"accuracy", accuracy ? json(*accuracy) : json(nullptr)},
            {"per_question", std::move(per)},
            {"config_fingerprint", config_fingerprint},
            {"warnings", warnings}};
}

std::string MetricReport::to_table() const
{
    std::ostringstream os;
    os << "dataset: " << (dataset.empty() ? "-" : dataset) << "   questions: " << n_questions << "\n";
    os << std::left << std::setw(14) << "metric" << "value\n";
    for (const auto& [k, v] : recall_at) {
        os << std::left << std::setw(14) << ("recall@" + std::to_string(k)) << format_pct(v) << "\n";
    }
    if (accuracy) {
        os << std::left << std::setw(14) << "accuracy" << format_pct(*accuracy) << "\n";
    }
    return os.str();
}

const std::vector<std::string>& ResultsTable::columns()
{
    static const std::vector<std::string> cols{"NQ@5",      "NQ@20",     "TQA@5",      "TQA@20",
                                               "Hotpot@5",  "Hotpot@20", "BoolQ Acc.", "STQA Acc."};
    return cols;
}

void ResultsTable::add(const std::string& system, DatasetKind dataset, const MetricReport& report)
{
    if (std::find(systems_.begin(), systems_.end(), system) == systems_.end()) {
        systems_.push_back(system);
    }
    auto& row = cells_[system];
    auto label = std::string(column_label(dataset));
    if (dataset == DatasetKind::boolq || dataset == DatasetKind::strategyqa) {
        if (report.accuracy) {
            row[label + " Acc."] = *report.accuracy;
        }
        return;
    }
    for (int k : {5, 20}) {
        if (auto it = report.recall_at.find(k); it != report.recall_at.end()) {
            row[label + "@" + std::to_string(k)] = it->second;
        }
    }
}

std::optional<double> ResultsTable::cell(const std::string& system, const std::string& column) const
{
    auto row = cells_.find(system);
    if (row == cells_.end()) {
        return std::nullopt;
    }
    auto it = row->second.find(column);
    return it == row->second.end() ? std::nullopt : std::optional<double>(it->second);
}

std::string ResultsTable::to_text() const
{
    std::size_t sys_width = 6;
    for (const auto& s : systems_) {
        sys_width = std::max(sys_width, s.size());
    }
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(sys_width)) << "System";
    for (const auto& c : columns()) {
        os << "  " << std::right << std::setw(static_cast<int>(std::max<std::size_t>(c.size(), 5))) << c;
    }
    os << "\n";
    for (const auto& s : systems_) {
        os << std::left << std::setw(static_cast<int>(sys_width)) << s;
        for (const auto& c : columns()) {
            auto v = cell(s, c);
            os << "  " << std::right << std::setw(static_cast<int>(std::max<std::size_t>(c.size(), 5)))
               << (v ? format_pct(*v) : std::string("-"));
        }
        os << "\n";
    }
    return os.str();
}

json ResultsTable::to_json() const
{
    json rows = json::array();
    for (const auto& s : systems_) {
        json row{{"system", s}};
        for (const auto& c : columns()) {
            auto v = cell(s, c);
            row[c] = v ? json(*v) : json(nullptr);
        }
        rows.push_back(std::move(row));
    }
    return {{"columns", columns()}, {"rows", std::move(rows)}};
}

}  // namespace elr
