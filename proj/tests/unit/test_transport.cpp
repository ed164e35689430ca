#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "elr/transport.hpp"
#include "support.hpp"

using namespace elr;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::string fake_provider() { return std::string("exec:") + ELR_FAKE_PROVIDER; }

json link(const std::string& text) { return {{"op", "entity_link"}, {"text", text}, {"k", 3}}; }

}  // namespace

TEST_SUITE("transport")
{
    TEST_CASE("endpoint config parsing")
    {
        auto a = EndpointConfig::from_json("http://127.0.0.1:9/x");
        CHECK(a.endpoint == "http://127.0.0.1:9/x");
        CHECK(a.retries == 2);
        CHECK(a.timeout == 30000ms);
        auto b = EndpointConfig::from_json(json{{"endpoint", "exec:cat"}, {"timeout_ms", 250}, {"retries", 0}});
        CHECK(b.timeout == 250ms);
        CHECK(b.retries == 0);
        CHECK(EndpointConfig::from_json(b.to_json()).endpoint == "exec:cat");
        CHECK(EndpointConfig{}.is_builtin());
        CHECK_THROWS((void)EndpointConfig::from_json(json{{"endpoint", "exec:cat"}, {"timeout_ms", -1}}));
        CHECK_THROWS((void)EndpointConfig::from_json(json::array()));
        CHECK_THROWS_AS((void)make_transport(EndpointConfig::from_json("ftp://x")), std::invalid_argument);
    }

    TEST_CASE("subprocess transport pairs requests and responses")
    {
        SubprocessTransport t(ELR_FAKE_PROVIDER, 5000ms);
        CHECK(t.alive());
        for (int i = 0; i < 20; ++i) {
            auto r = t.call({{"op", "entity_link"}, {"text", "q"}, {"k", i % 4 + 1}});
            CHECK(r["titles"].size() == static_cast<std::size_t>(i % 4 + 1));
        }
        auto s = t.call({{"op", "score"}, {"pairs", {{{"q", "a"}, {"c", "abc"}}, {{"q", "a"}, {"c", "abcdefg"}}}}});
        CHECK(s["scores"] == json::array({0.3, 0.7}));
    }

    TEST_CASE("subprocess timeout kills and respawns the child")
    {
        SubprocessTransport t(ELR_FAKE_PROVIDER, 300ms);
        auto pid_before = t.call(link("__pid__"))["titles"][0].get<std::string>();
        CHECK_THROWS_AS((void)t.call(link("__sleep__")), TransportError);
        auto pid_after = t.call(link("__pid__"))["titles"][0].get<std::string>();
        CHECK(pid_before != pid_after);
        CHECK(t.call(link("ok"))["titles"].size() == 3);
    }

    TEST_CASE("subprocess child exit and garbage output")
    {
        SubprocessTransport t(ELR_FAKE_PROVIDER, 2000ms);
        CHECK_THROWS_AS((void)t.call(link("__exit__")), TransportError);
        CHECK(t.call(link("recovered"))["titles"].size() == 3);
        CHECK_THROWS_AS((void)t.call(link("__garbage__")), TransportError);
        CHECK(t.call(link("again"))["titles"].size() == 3);
    }

    TEST_CASE("subprocess transport is safe across threads")
    {
        auto t = make_transport(EndpointConfig::from_json(fake_provider()));
        std::atomic<int> ok{0};
        std::vector<std::thread> threads;
        for (int i = 0; i < 4; ++i) {
            threads.emplace_back([&, i] {
                for (int j = 0; j < 10; ++j) {
                    int k = (i + j) % 5 + 1;
                    auto r = t->call({{"op", "event_link"}, {"text", "x"}, {"k", k}});
                    if (r["titles"].size() == static_cast<std::size_t>(k)) ++ok;
                }
            });
        }
        for (auto& th : threads) th.join();
        CHECK(ok == 40);
    }

    TEST_CASE("missing executable is a transport error")
    {
        SubprocessTransport t("/nonexistent/provider-binary", 500ms);
        CHECK_THROWS_AS((void)t.call(link("x")), TransportError);
    }

    TEST_CASE("http transport posts JSON")
    {
        httplib::Server server;
        server.Post("/provider", [](const httplib::Request& req, httplib::Response& res) {
            auto body = json::parse(req.body);
            if (body["text"] == "slow") std::this_thread::sleep_for(1500ms);
            res.set_content(json{{"titles", {body["op"].get<std::string>(), body["text"].get<std::string>()}}}.dump(),
                            "application/json");
        });
        server.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
        server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("oops", "text/plain");
        });
        int port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        std::thread th([&] { server.listen_after_bind(); });
        server.wait_until_ready();

        const auto base = "http://127.0.0.1:" + std::to_string(port);
        HttpTransport t(base + "/provider", 1000ms);
        CHECK(t.alive());
        CHECK(t.call(link("hello"))["titles"] == json::array({"entity_link", "hello"}));
        CHECK_THROWS_AS((void)t.call(link("slow")), TransportError);
        HttpTransport broken(base + "/broken", 1000ms);
        CHECK_THROWS_AS((void)broken.call(link("x")), TransportError);

        server.stop();
        th.join();
        CHECK_FALSE(t.alive());
        CHECK_THROWS_AS((void)t.call(link("down")), TransportError);
    }

    TEST_CASE("replay transport answers recorded requests")
    {
        ReplayTransport t(test::fixture("replay/providers.jsonl"));
        auto r = t.call({{"op", "entity_link"}, {"text", "what is the capital of france"}, {"k", 10}});
        CHECK(r["titles"] == json::array({"France"}));
        auto miss = t.call({{"op", "entity_link"}, {"text", "unrecorded"}, {"k", 10}});
        CHECK(miss.contains("error"));
        CHECK_THROWS((void)ReplayTransport(test::fixture("replay/absent.jsonl")));
    }

    TEST_CASE("call_with_retries retries transport errors only")
    {
        int calls = 0;
        FunctionTransport flaky([&](const json&) -> json {
            if (++calls < 3) throw TransportError("flaky");
            return json{{"ok", true}};
        });
        CHECK(call_with_retries(flaky, json::object(), 2)["ok"] == true);
        CHECK(calls == 3);

        calls = 0;
        CHECK_THROWS_AS((void)call_with_retries(flaky, json::object(), 1), TransportError);
        CHECK(calls == 2);

        calls = 0;
        FunctionTransport fatal([&](const json&) -> json {
            ++calls;
            throw std::logic_error("bug");
        });
        CHECK_THROWS_AS((void)call_with_retries(fatal, json::object(), 5), std::logic_error);
        CHECK(calls == 1);
    }
}
