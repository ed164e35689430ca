#include <fstream>
#include <sstream>

#include "elr/eval.hpp"
#include "elr/text.hpp"

namespace elr {

using nlohmann::json;

DatasetKind dataset_kind_from_string(std::string_view name)
{
    auto n = text::to_lower_ascii(name);
    if (n == "nq" || n == "naturalquestions" || n == "nq-open") return DatasetKind::nq;
    if (n == "tqa" || n == "triviaqa") return DatasetKind::tqa;
    if (n == "hotpot" || n == "hotpotqa") return DatasetKind::hotpot;
    if (n == "boolq" || n == "boolqa") return DatasetKind::boolq;
    if (n == "strategyqa" || n == "stqa") return DatasetKind::strategyqa;
    throw std::invalid_argument("unknown dataset: " + std::string(name) + " (expected nq|tqa|hotpot|boolq|strategyqa)");
}

std::string_view to_string(DatasetKind kind)
{
    switch (kind) {
    case DatasetKind::nq: return "nq";
    case DatasetKind::tqa: return "tqa";
    case DatasetKind::hotpot: return "hotpot";
    case DatasetKind::boolq: return "boolq";
    case DatasetKind::strategyqa: return "strategyqa";
    }
    return "unknown";
}

std::string_view column_label(DatasetKind kind)
{
    switch (kind) {
    case DatasetKind::nq: return "NQ";
    case DatasetKind::tqa: return "TQA";
    case DatasetKind::hotpot: return "Hotpot";
    case DatasetKind::boolq: return "BoolQ";
    case DatasetKind::strategyqa: return "STQA";
    }
    return "?";
}

namespace {

// A whole-document JSON value, or one value per non-blank line.
std::vector<json> read_records(std::istream& in, const std::string& source, bool& whole_document)
{
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    whole_document = false;
    try {
        auto doc = json::parse(content);
        whole_document = true;
        if (doc.is_array()) {
            return std::vector<json>(doc.begin(), doc.end());
        }
        return {std::move(doc)};
    } catch (const json::exception&) {
    }
    std::vector<json> out;
    std::istringstream lines(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (text::split_words(line).empty()) {
            continue;
        }
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw DatasetError(source + ":" + std::to_string(lineno) + ": not JSON: " + e.what());
        }
    }
    return out;
}

[[noreturn]] void bad_record(const std::string& source, std::size_t i, const json& rec, const std::string& why)
{
    auto dump = rec.dump();
    if (dump.size() > 200) {
        dump = dump.substr(0, 200) + "...";
    }
    throw DatasetError(source + ": record " + std::to_string(i) + ": " + why + ": " + dump);
}

std::string string_field(const json& rec, const char* key, const std::string& source, std::size_t i)
{
    auto it = rec.find(key);
    if (!rec.is_object() || it == rec.end() || !it->is_string()) {
        bad_record(source, i, rec, std::string("missing string field '") + key + "'");
    }
    return it->get<std::string>();
}

bool bool_field(const json& rec, const char* key, const std::string& source, std::size_t i)
{
    auto it = rec.find(key);
    if (!rec.is_object() || it == rec.end() || !it->is_boolean()) {
        bad_record(source, i, rec, std::string("missing boolean field '") + key + "'");
    }
    return it->get<bool>();
}

EvalQuestion boolean_question(std::string qid, std::string question, bool gold)
{
    EvalQuestion q;
    q.qid = std::move(qid);
    q.question = std::move(question);
    q.answer_type = AnswerType::boolean;
    q.gold_bool = gold;
    q.answers = {gold ? "yes" : "no"};
    return q;
}

std::vector<EvalQuestion> load_nq(const std::vector<json>& records, const std::string& source)
{
    std::vector<EvalQuestion> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        EvalQuestion q;
        q.question = string_field(rec, "question", source, i);
        q.qid = rec.contains("id") ? (rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump())
                                   : "nq-" + std::to_string(i);
        const json* answers = nullptr;
        if (auto it = rec.find("answer"); it != rec.end()) answers = &*it;
        else if (auto it2 = rec.find("answers"); it2 != rec.end()) answers = &*it2;
        if (answers == nullptr || !answers->is_array() || answers->empty()) {
            bad_record(source, i, rec, "expected a non-empty 'answer' array");
        }
        for (const auto& a : *answers) {
            if (!a.is_string()) {
                bad_record(source, i, rec, "non-string answer");
            }
            q.answers.push_back(a.get<std::string>());
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<EvalQuestion> load_tqa(std::vector<json> records, bool whole_document, const std::string& source)
{
    if (whole_document && records.size() == 1 && records[0].is_object() && records[0].contains("Data")) {
        const auto& data = records[0]["Data"];
        records.assign(data.begin(), data.end());
    }
    std::vector<EvalQuestion> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.is_object() && rec.contains("Question")) {
            EvalQuestion q;
            q.question = string_field(rec, "Question", source, i);
            q.qid = rec.value("QuestionId", "tqa-" + std::to_string(i));
            auto it = rec.find("Answer");
            if (it == rec.end() || !it->is_object()) {
                bad_record(source, i, rec, "missing 'Answer' object");
            }
            std::vector<std::string> answers;
            if (auto v = it->find("Value"); v != it->end() && v->is_string()) answers.push_back(v->get<std::string>());
            for (const auto& a : it->value("Aliases", json::array())) {
                if (a.is_string() && std::find(answers.begin(), answers.end(), a.get<std::string>()) == answers.end()) {
                    answers.push_back(a.get<std::string>());
                }
            }
            if (answers.empty()) {
                bad_record(source, i, rec, "no answer value or aliases");
            }
            q.answers = std::move(answers);
            out.push_back(std::move(q));
        } else {
            // Open-domain TriviaQA exports share the NQ-open layout.
            auto one = load_nq({rec}, source);
            one.front().qid = rec.value("id", "tqa-" + std::to_string(i));
            out.push_back(std::move(one.front()));
        }
    }
    return out;
}

std::vector<EvalQuestion> load_hotpot(const std::vector<json>& records, const std::string& source)
{
    std::vector<EvalQuestion> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        auto question = string_field(rec, "question", source, i);
        auto answer = string_field(rec, "answer", source, i);
        auto qid = rec.value("_id", "hotpot-" + std::to_string(i));
        auto norm = normalize_answer(answer);
        if (norm == "yes" || norm == "no") {
            out.push_back(boolean_question(std::move(qid), std::move(question), norm == "yes"));
            continue;
        }
        EvalQuestion q;
        q.qid = std::move(qid);
        q.question = std::move(question);
        q.answers = {std::move(answer)};
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<EvalQuestion> load_boolean(const std::vector<json>& records, const std::string& source,
                                       const char* qid_field, const std::string& prefix)
{
    std::vector<EvalQuestion> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        auto question = string_field(rec, "question", source, i);
        bool gold = bool_field(rec, "answer", source, i);
        std::string qid = prefix + std::to_string(i);
        if (auto it = rec.find(qid_field); it != rec.end()) {
            qid = it->is_string() ? it->get<std::string>() : it->dump();
        }
        out.push_back(boolean_question(std::move(qid), std::move(question), gold));
    }
    return out;
}

}  // namespace

std::vector<EvalQuestion> load_dataset(DatasetKind kind, std::istream& in, const std::string& source_name)
{
    bool whole = false;
    auto records = read_records(in, source_name, whole);
    switch (kind) {
    case DatasetKind::nq: return load_nq(records, source_name);
    case DatasetKind::tqa: return load_tqa(std::move(records), whole, source_name);
    case DatasetKind::hotpot: return load_hotpot(records, source_name);
    case DatasetKind::boolq: return load_boolean(records, source_name, "id", "boolq-");
    case DatasetKind::strategyqa: return load_boolean(records, source_name, "qid", "stqa-");
    }
    throw DatasetError("unsupported dataset kind");
}

std::vector<EvalQuestion> load_dataset(DatasetKind kind, const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError("cannot open dataset file: " + path.string());
    }
    return load_dataset(kind, in, path.string());
}

}  // namespace elr
