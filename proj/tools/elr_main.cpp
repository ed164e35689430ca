// elr: build indexes, run retrieval, evaluate runs and export reranker
// training data from the command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "elr/components.hpp"
#include "elr/corpus.hpp"
#include "elr/eval.hpp"
#include "elr/index.hpp"
#include "elr/pipeline.hpp"
#include "elr/rerank.hpp"
#include "elr/text.hpp"
#include "elr/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string utc_now()
{
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string file_checksum(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return "unreadable";
    }
    elr::text::Fnv1a h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    return h.hex();
}

/// Written as `<output>.run.json`; records what is needed to rerun the command.
class RunManifest {
  public:
    explicit RunManifest(std::string command) : command_(std::move(command)), started_(utc_now()) {}

    void config(json c) { config_ = std::move(c); }
    void input(const std::string& name, const std::string& checksum) { inputs_[name] = checksum; }
    void input_file(const fs::path& path) { inputs_[path.string()] = file_checksum(path); }
    void seed(std::uint64_t s) { seed_ = s; }

    void write_next_to(const fs::path& output) const
    {
        json m{{"command", command_},
               {"config", config_},
               {"inputs", inputs_},
               {"versions", {{"elr", elr::kVersion}, {"index_format", elr::kIndexFormatVersion}, {"passage_store_format", elr::kPassageStoreVersion}}},
               {"seed", seed_},
               {"started_at", started_},
               {"finished_at", utc_now()}};
        auto path = output;
        path += ".run.json";
        std::ofstream out(path);
        if (!out) {
            throw std::runtime_error("cannot write run manifest " + path.string());
        }
        out << m.dump(2) << '\n';
    }

  private:
    std::string command_;
    std::string started_;
    json config_ = json::object();
    json inputs_ = json::object();
    std::uint64_t seed_ = 0;
};

/// Flags > config file > defaults.
class Settings {
  public:
    explicit Settings(const std::string& config_path)
    {
        if (!config_path.empty()) {
            file_ = elr::read_json_config(config_path);
            if (!file_.is_object()) {
                throw UsageError("config file must hold a JSON object");
            }
        }
    }

    template <typename T>
    T get(const CLI::App& app, const std::string& flag, const T& flag_value, const std::string& key, const T& fallback) const
    {
        if (app.count(flag) > 0) {
            return flag_value;
        }
        if (auto it = file_.find(key); it != file_.end()) {
            return it->get<T>();
        }
        return fallback;
    }

    [[nodiscard]] json section(const std::string& key) const
    {
        auto it = file_.find(key);
        return it == file_.end() ? json() : *it;
    }

  private:
    json file_ = json::object();
};

json load_config_ref(const std::string& flag_value, const json& from_file)
{
    if (!flag_value.empty()) {
        return elr::read_json_config(flag_value);
    }
    if (from_file.is_string()) {
        return elr::read_json_config(from_file.get<std::string>());
    }
    return from_file.is_null() ? json::object() : from_file;
}

std::pair<elr::DatasetKind, fs::path> parse_dataset_arg(const std::string& arg)
{
    auto colon = arg.find(':');
    if (colon == std::string::npos) {
        throw UsageError("--dataset expects NAME:PATH (e.g. nq:nq-dev.jsonl)");
    }
    try {
        return {elr::dataset_kind_from_string(arg.substr(0, colon)), fs::path(arg.substr(colon + 1))};
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<int> parse_ks(const std::string& s)
{
    std::vector<int> ks;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            int k = std::stoi(item);
            if (k < 1) throw std::invalid_argument("");
            ks.push_back(k);
        } catch (const std::exception&) {
            throw UsageError("--k expects a comma-separated list of positive integers");
        }
    }
    if (ks.empty()) {
        throw UsageError("--k expects at least one value");
    }
    return ks;
}

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

// --- build-index -----------------------------------------------------------

struct BuildIndexArgs {
    std::string corpus, index, config;
    double k1 = 0.9, b = 0.4;
    bool stem = false, stopwords = false;
    unsigned jobs = 1;
};

int cmd_build_index(const CLI::App& app, const BuildIndexArgs& a)
{
    Settings s(a.config);
    elr::IndexOptions options;
    options.bm25.k1 = s.get(app, "--k1", a.k1, "k1", 0.9);
    options.bm25.b = s.get(app, "--b", a.b, "b", 0.4);
    options.tokenizer.stem = s.get(app, "--stem", a.stem, "stem", false);
    options.tokenizer.remove_stopwords = s.get(app, "--stopwords", a.stopwords, "stopwords", false);
    const unsigned jobs = s.get(app, "--jobs", a.jobs, "jobs", 1U);
    try {
        options.bm25.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    RunManifest manifest("build-index");
    manifest.input_file(a.corpus);
    auto store = std::make_shared<const elr::PassageStore>(elr::ingest_corpus_file(a.corpus, jobs));
    auto index = elr::InvertedIndex::build(store, options, jobs);
    index.save(a.index);

    manifest.config({{"k1", options.bm25.k1}, {"b", options.bm25.b}, {"stem", options.tokenizer.stem},
                     {"stopwords", options.tokenizer.remove_stopwords}, {"jobs", jobs}});
    manifest.input("corpus_checksum", store->checksum());
    manifest.write_next_to(fs::path(a.index).lexically_normal().string() == "." ? fs::path("index") : fs::path(a.index).lexically_normal());

    const auto& st = store->stats();
    std::cerr << "indexed " << st.documents << " documents, " << st.passages << " passages, " << st.words
              << " words; " << index.stats().term_count << " terms -> " << a.index << "\n";
    return kExitOk;
}

// --- pipeline assembly -------------------------------------------------------

struct PipelineArgs {
    std::string index, providers, scorer, config;
    std::size_t k = 100, n_coarse = 200;
    bool correct = false;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

struct AssembledPipeline {
    std::unique_ptr<elr::Pipeline> pipeline;
    json config;
    std::string index_checksum;
};

AssembledPipeline assemble(const CLI::App& app, const PipelineArgs& a)
{
    Settings s(a.config);
    elr::PipelineConfig config = elr::PipelineConfig::from_json(s.section("pipeline").is_object() ? s.section("pipeline") : json::object());
    config.k_final = s.get(app, "--k", a.k, "k", config.k_final);
    config.n_coarse = s.get(app, "--n-coarse", a.n_coarse, "n_coarse", config.n_coarse);
    config.titles.corrector_enabled = s.get(app, "--correct", a.correct, "correct", config.titles.corrector_enabled);
    config.seed = s.get(app, "--seed", a.seed, "seed", config.seed);
    config.jobs = s.get(app, "--jobs", a.jobs, "jobs", config.jobs);
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    auto providers_json = load_config_ref(a.providers, s.section("providers"));
    auto scorer_json = load_config_ref(a.scorer, s.section("scorer"));
    auto provider_settings = elr::ProviderSettings::from_json(providers_json);
    auto scorer_settings = scorer_json.empty() ? elr::ScorerSettings{} : elr::ScorerSettings::from_json(scorer_json);

    auto index = std::make_shared<const elr::InvertedIndex>(elr::InvertedIndex::load(a.index));
    elr::Components components{index, elr::make_title_providers(provider_settings, index->store()),
                               elr::make_scorer(scorer_settings)};
    AssembledPipeline out;
    out.index_checksum = index->store().checksum();
    out.config = {{"pipeline", config.to_json()},
                  {"providers", provider_settings.to_json()},
                  {"scorer", scorer_settings.to_json()},
                  {"bm25", {{"k1", index->options().bm25.k1}, {"b", index->options().bm25.b}}}};
    out.pipeline = std::make_unique<elr::Pipeline>(std::move(components), config);
    return out;
}

void add_pipeline_flags(CLI::App* cmd, PipelineArgs& a)
{
    cmd->add_option("--index", a.index, "Index directory from build-index")->required();
    cmd->add_option("--providers", a.providers, "Provider config JSON (default: builtin fallbacks)");
    cmd->add_option("--scorer", a.scorer, "Scorer config JSON (default: builtin lexical scorer)");
    cmd->add_option("--k", a.k, "Passages kept after reranking (default 100)");
    cmd->add_option("--n-coarse", a.n_coarse, "BM25 candidates passed to the reranker (default 200)");
    cmd->add_flag("--correct", a.correct, "Run the decomposition corrector");
    cmd->add_option("--seed", a.seed, "Seed recorded with the run");
    cmd->add_option("--jobs", a.jobs, "Queries processed concurrently");
    cmd->add_option("--config", a.config, "JSON config file (flags take precedence)");
}

// --- retrieve ----------------------------------------------------------------

struct RetrieveArgs {
    PipelineArgs p;
    std::string query, query_file, dataset, out, format = "json";
};

std::vector<elr::QueryInput> read_query_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open query file: " + path.string());
    }
    std::vector<elr::QueryInput> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (elr::text::trim(line).empty()) {
            continue;
        }
        elr::QueryInput q{"q" + std::to_string(lineno), elr::text::trim(line)};
        if (line.front() == '{') {
            try {
                auto j = json::parse(line);
                q.query = j.contains("question") ? j["question"].get<std::string>() : j.at("query").get<std::string>();
                if (j.contains("qid")) q.qid = j["qid"].get<std::string>();
                else if (j.contains("id")) q.qid = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
            } catch (const json::exception& e) {
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        out.push_back(std::move(q));
    }
    return out;
}

void print_trace_table(std::ostream& out, const elr::QueryTrace& t)
{
    out << "query: " << t.query << (t.qid.empty() ? "" : "  [" + t.qid + "]") << "\n";
    out << "titles: " << t.titles.unique_titles.size() << "  coarse: " << t.coarse.size() << "  final: " << t.final.size()
        << "  (" << std::fixed << std::setprecision(1) << t.timings.total_ms << " ms)\n";
    for (std::size_t i = 0; i < t.final.size(); ++i) {
        const auto& r = t.final[i];
        out << std::setw(4) << i + 1 << "  " << std::setprecision(3) << r.relevance_score << "  " << std::setprecision(3)
            << r.bm25_score << "  " << r.passage_id << "\n";
    }
    for (const auto& w : t.warnings) {
        out << "  warning: " << w << "\n";
    }
}

int cmd_retrieve(const CLI::App& app, RetrieveArgs& a)
{
    int sources = !a.query.empty() + !a.query_file.empty() + !a.dataset.empty();
    if (sources != 1) {
        throw UsageError("retrieve needs exactly one of --query, --query-file, --dataset");
    }
    if (a.format != "json" && a.format != "table") {
        throw UsageError("--format must be json or table");
    }
    RunManifest manifest("retrieve");
    std::vector<elr::QueryInput> queries;
    if (!a.query.empty()) {
        queries.push_back({"q1", a.query});
    } else if (!a.query_file.empty()) {
        queries = read_query_file(a.query_file);
        manifest.input_file(a.query_file);
    } else {
        auto [kind, path] = parse_dataset_arg(a.dataset);
        for (auto& q : elr::load_dataset(kind, path)) {
            queries.push_back({q.qid, q.question});
        }
        manifest.input_file(path);
    }

    auto assembled = assemble(app, a.p);
    manifest.input("index:" + a.p.index, assembled.index_checksum);
    manifest.config(assembled.config);
    manifest.seed(assembled.pipeline->config().seed);

    auto traces = assembled.pipeline->retrieve_batch(queries, assembled.pipeline->config().jobs);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!a.out.empty()) {
        file = open_output(a.out);
        out = &file;
    }
    for (const auto& t : traces) {
        if (a.format == "json") {
            *out << elr::to_json(t).dump() << '\n';
        } else {
            print_trace_table(*out, t);
        }
    }
    if (!a.out.empty()) {
        file.close();
        manifest.write_next_to(a.out);
        std::cerr << "wrote " << traces.size() << " trace(s) to " << a.out << "\n";
    }
    return kExitOk;
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
    std::string trace, dataset, ks = "5,20", answerer, out, format = "table", system, config;
    std::size_t answer_k = 5;
};

int cmd_eval(const CLI::App& app, const EvalArgs& a)
{
    if (a.format != "json" && a.format != "table") {
        throw UsageError("--format must be json or table");
    }
    Settings s(a.config);
    auto [kind, path] = parse_dataset_arg(a.dataset);
    auto ks = parse_ks(s.get(app, "--k", a.ks, "k", std::string("5,20")));

    RunManifest manifest("eval");
    manifest.input_file(a.trace);
    manifest.input_file(path);

    auto run = elr::read_run_file(a.trace);
    auto questions = elr::load_dataset(kind, path);
    elr::Warnings filter_warnings;
    elr::MetricReport report;
    if (kind == elr::DatasetKind::boolq || kind == elr::DatasetKind::strategyqa) {
        auto answerer_json = load_config_ref(a.answerer, s.section("answerer"));
        std::unique_ptr<elr::YesNoAnswerer> answerer;
        auto endpoint = answerer_json.empty() ? elr::EndpointConfig{} : elr::EndpointConfig::from_json(answerer_json);
        if (endpoint.is_builtin()) {
            answerer = std::make_unique<elr::KeywordAnswerer>();
        } else {
            answerer = std::make_unique<elr::RemoteAnswerer>(elr::make_transport(endpoint), endpoint.retries);
        }
        auto k = s.get(app, "--answer-k", a.answer_k, "answer_k", std::size_t{5});
        report = elr::boolean_accuracy(run, questions, *answerer, k, std::string(elr::to_string(kind)));
        manifest.config({{"answerer", endpoint.to_json()}, {"answer_k", k}});
    } else {
        std::size_t removed = 0;
        if (kind == elr::DatasetKind::hotpot) {
            auto filtered = elr::filter_yes_no(std::move(questions));
            questions = std::move(filtered.kept);
            removed = filtered.removed;
            filter_warnings = std::move(filtered.warnings);
        }
        report = elr::recall_at_k(run, questions, ks, std::string(elr::to_string(kind)));
        if (kind == elr::DatasetKind::hotpot) {
            report.warnings.insert(report.warnings.begin(), "removed " + std::to_string(removed) + " yes/no question(s)");
            report.warnings.insert(report.warnings.end(), filter_warnings.begin(), filter_warnings.end());
        }
        manifest.config({{"k", ks}});
    }

    std::string rendered;
    if (a.format == "json") {
        auto j = report.to_json();
        if (!a.system.empty()) {
            j["system"] = a.system;
        }
        rendered = j.dump(2) + "\n";
    } else {
        rendered = report.to_table();
    }
    if (a.out.empty()) {
        std::cout << rendered;
    } else {
        auto out = open_output(a.out);
        out << rendered;
        out.close();
        manifest.write_next_to(a.out);
    }
    for (const auto& w : report.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    return kExitOk;
}

// --- table -------------------------------------------------------------------

struct TableArgs {
    std::vector<std::string> reports;
    std::string system = "System", format = "table", out;
};

int cmd_table(const TableArgs& a)
{
    if (a.format != "json" && a.format != "table") {
        throw UsageError("--format must be json or table");
    }
    elr::ResultsTable table;
    for (const auto& path : a.reports) {
        auto j = elr::read_json_config(path);
        elr::MetricReport r;
        r.dataset = j.at("dataset").get<std::string>();
        for (const auto& [k, v] : j.at("recall_at").items()) {
            r.recall_at[std::stoi(k)] = v.get<double>();
        }
        if (j.contains("accuracy") && !j["accuracy"].is_null()) {
            r.accuracy = j["accuracy"].get<double>();
        }
        table.add(j.value("system", a.system), elr::dataset_kind_from_string(r.dataset), r);
    }
    std::string rendered = a.format == "json" ? table.to_json().dump(2) + "\n" : table.to_text();
    if (a.out.empty()) {
        std::cout << rendered;
    } else {
        open_output(a.out) << rendered;
    }
    return kExitOk;
}

// --- export-train ------------------------------------------------------------

struct ExportArgs {
    std::string dataset, recipe, out, match;
    std::uint64_t seed = 0;
    std::size_t size = 0;
};

int cmd_export_train(const CLI::App& app, const ExportArgs& a)
{
    RunManifest manifest("export-train");
    manifest.input_file(a.dataset);
    manifest.seed(a.seed);
    elr::TrainingExport ex;
    if (a.recipe == "hotpot") {
        auto records = elr::load_hotpot_training(a.dataset);
        ex = elr::export_hotpot_pairs(records, a.seed);
        manifest.config({{"recipe", "hotpot"}});
    } else if (a.recipe == "nq") {
        std::size_t size = a.size;
        if (!a.match.empty()) {
            size = elr::read_export_size(a.match);
            manifest.input_file(a.match);
        } else if (app.count("--size") == 0) {
            throw UsageError("nq recipe needs --size or --match");
        }
        if (size % 2 != 0) {
            throw UsageError("nq export size must be even");
        }
        auto records = elr::load_nq_training(a.dataset);
        ex = elr::export_nq_pairs(records, size, a.seed);
        manifest.config({{"recipe", "nq"}, {"size", size}});
    } else {
        throw UsageError("--recipe must be hotpot or nq");
    }
    auto out = open_output(a.out);
    ex.write_tsv(out);
    out.close();
    manifest.write_next_to(a.out);
    for (const auto& w : ex.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    std::cerr << "wrote " << ex.pairs.size() << " pairs (" << ex.positives() << " pos / " << ex.negatives()
              << " neg) to " << a.out << "\n";
    return kExitOk;
}

// --- serve -------------------------------------------------------------------

struct ServeArgs {
    PipelineArgs p;
    std::string host = "127.0.0.1";
    int port = 8080;
};

int cmd_serve(const CLI::App& app, const ServeArgs& a)
{
    auto assembled = assemble(app, a.p);
    elr::RetrievalServer server(*assembled.pipeline);
    std::cerr << "serving index " << assembled.index_checksum << " on http://" << a.host << ":" << a.port << "\n";
    if (!server.listen(a.host, a.port)) {
        throw std::runtime_error("cannot listen on " + a.host + ":" + std::to_string(a.port));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"elr: entity/event-linked passage retrieval"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(elr::kVersion));

    BuildIndexArgs build;
    auto* build_cmd = app.add_subcommand("build-index", "Chunk a corpus into 100-word passages and build a BM25 index");
    build_cmd->add_option("--corpus", build.corpus, "Corpus JSON lines {id,title,text}")->required();
    build_cmd->add_option("--index", build.index, "Output index directory")->required();
    build_cmd->add_option("--k1", build.k1, "BM25 k1 (default 0.9)");
    build_cmd->add_option("--b", build.b, "BM25 b (default 0.4)");
    build_cmd->add_flag("--stem", build.stem, "Strip plural suffixes when tokenizing");
    build_cmd->add_flag("--stopwords", build.stopwords, "Drop stopwords when tokenizing");
    build_cmd->add_option("--jobs", build.jobs, "Worker threads");
    build_cmd->add_option("--config", build.config, "JSON config file (flags take precedence)");

    RetrieveArgs retrieve;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Run the retrieval pipeline and write query traces");
    add_pipeline_flags(retrieve_cmd, retrieve.p);
    retrieve_cmd->add_option("--query", retrieve.query, "A single query");
    retrieve_cmd->add_option("--query-file", retrieve.query_file, "Queries, one per line (text or JSON with qid/question)");
    retrieve_cmd->add_option("--dataset", retrieve.dataset, "Questions from a dataset, NAME:PATH");
    retrieve_cmd->add_option("--out", retrieve.out, "Trace file (JSON lines); stdout if omitted");
    retrieve_cmd->add_option("--format", retrieve.format, "json|table");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a trace file against a dataset");
    eval_cmd->add_option("--trace", eval.trace, "Trace file from retrieve")->required();
    eval_cmd->add_option("--dataset", eval.dataset, "NAME:PATH with NAME in nq|tqa|hotpot|boolq|strategyqa")->required();
    eval_cmd->add_option("--k", eval.ks, "Comma-separated K values for recall (default 5,20)");
    eval_cmd->add_option("--answerer", eval.answerer, "Yes/no answerer config JSON (default: builtin keyword answerer)");
    eval_cmd->add_option("--answer-k", eval.answer_k, "Passages given to the answerer (default 5)");
    eval_cmd->add_option("--format", eval.format, "json|table");
    eval_cmd->add_option("--system", eval.system, "System name stored in JSON reports");
    eval_cmd->add_option("--out", eval.out, "Report file; stdout if omitted");
    eval_cmd->add_option("--config", eval.config, "JSON config file (flags take precedence)");

    TableArgs table;
    auto* table_cmd = app.add_subcommand("table", "Combine JSON eval reports into a results table");
    table_cmd->add_option("reports", table.reports, "Report files from eval --format json")->required();
    table_cmd->add_option("--system", table.system, "Row name for reports without a system field");
    table_cmd->add_option("--format", table.format, "json|table");
    table_cmd->add_option("--out", table.out, "Output file; stdout if omitted");

    ExportArgs ex;
    auto* export_cmd = app.add_subcommand("export-train", "Export reranker training pairs");
    export_cmd->add_option("--dataset", ex.dataset, "HotpotQA train JSON or DPR NQ train JSON")->required();
    export_cmd->add_option("--recipe", ex.recipe, "hotpot|nq")->required();
    export_cmd->add_option("--seed", ex.seed, "Sampling seed");
    export_cmd->add_option("--size", ex.size, "Pairs to keep (nq recipe)");
    export_cmd->add_option("--match", ex.match, "Take --size from an existing export's header (nq recipe)");
    export_cmd->add_option("--out", ex.out, "Output TSV")->required();

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve POST /retrieve and GET /health over HTTP");
    add_pipeline_flags(serve_cmd, serve.p);
    serve_cmd->add_option("--host", serve.host, "Bind address");
    serve_cmd->add_option("--port", serve.port, "Port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*build_cmd) return cmd_build_index(*build_cmd, build);
        if (*retrieve_cmd) return cmd_retrieve(*retrieve_cmd, retrieve);
        if (*eval_cmd) return cmd_eval(*eval_cmd, eval);
        if (*table_cmd) return cmd_table(table);
        if (*export_cmd) return cmd_export_train(*export_cmd, ex);
        if (*serve_cmd) return cmd_serve(*serve_cmd, serve);
    } catch (const UsageError& e) {
        std::cerr << "elr: usage error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "elr: error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
