#include <atomic>

#include <httplib.h>

#include "elr/pipeline.hpp"

namespace elr {

using nlohmann::json;

struct RetrievalServer::Impl {
    explicit Impl(const Pipeline& p) : pipeline(p) {}
    const Pipeline& pipeline;
    httplib::Server server;
};

RetrievalServer::RetrievalServer(const Pipeline& pipeline) : impl_(std::make_unique<Impl>(pipeline))
{
    auto& srv = impl_->server;
    srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(health().dump(), "application/json");
    });
    srv.Post("/retrieve", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            res.status = 400;
            res.set_content(json{{"error", "request body is not JSON"}}.dump(), "application/json");
            return;
        }
        if (!body.is_object() || !body.contains("query") || !body["query"].is_string()) {
            res.status = 400;
            res.set_content(json{{"error", "\"query\" (string) is required"}}.dump(), "application/json");
            return;
        }
        std::optional<std::size_t> k;
        if (auto it = body.find("k"); it != body.end()) {
            if (!it->is_number_integer() || it->get<long long>() < 1) {
                res.status = 400;
                res.set_content(json{{"error", "\"k\" must be a positive integer"}}.dump(), "application/json");
                return;
            }
            k = it->get<std::size_t>();
        }
        try {
            auto trace = impl_->pipeline.retrieve(body["query"].get<std::string>(), body.value("qid", ""), k);
            res.set_content(to_json(trace).dump(), "application/json");
        } catch (const std::invalid_argument& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    });
}

RetrievalServer::~RetrievalServer() { stop(); }

bool RetrievalServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int RetrievalServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

void RetrievalServer::listen_after_bind() { impl_->server.listen_after_bind(); }

void RetrievalServer::stop()
{
    if (impl_ && impl_->server.is_running()) {
        impl_->server.stop();
    }
}

void RetrievalServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

json RetrievalServer::health() const
{
    const auto& c = impl_->pipeline.components();
    auto describe = [](auto* backend) -> json {
        if (backend == nullptr) {
            return {{"endpoint", "none"}, {"alive", false}};
        }
        return {{"endpoint", backend->describe()}, {"alive", backend->alive()}};
    };
    return {{"status", "ok"},
            {"index_checksum", c.index->store().checksum()},
            {"passages", c.index->stats().passage_count},
            {"config_fingerprint", impl_->pipeline.config().fingerprint()},
            {"providers",
             {{"entity_link", describe(c.providers.entity_linker.get())},
              {"event_link", describe(c.providers.event_linker.get())},
              {"decompose", describe(c.providers.decomposer.get())},
              {"correct", describe(c.providers.corrector.get())},
              {"score", describe(c.scorer.get())}}}};
}

}  // namespace elr
