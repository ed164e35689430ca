#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace elr {

/// Where a provider lives and how hard to try reaching it.
///
/// endpoint forms:
///   "http://host:port/path"  JSON body POSTed, JSON body returned
///   "exec:<shell command>"    one request line on stdin, one response line on stdout
///   "replay:<file.jsonl>"     recorded {"request":...,"response":...} pairs
///   "builtin"                 model-free fallback chosen by the caller
struct EndpointConfig {
    std::string endpoint = "builtin";
    std::chrono::milliseconds timeout{30000};
    int retries = 2;

    static EndpointConfig from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] bool is_builtin() const { return endpoint.empty() || endpoint == "builtin"; }
};

/// The provider could not be reached or did not answer in time.
class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Carries one JSON request to a provider and returns its JSON response.
/// Implementations are safe to call from several threads.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual nlohmann::json call(const nlohmann::json& request) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
    virtual bool alive() { return true; }
};

class HttpTransport final : public Transport {
  public:
    HttpTransport(std::string url, std::chrono::milliseconds timeout);
    nlohmann::json call(const nlohmann::json& request) override;
    [[nodiscard]] std::string describe() const override { return url_; }
    bool alive() override;

  private:
    std::string url_;
    std::string base_;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

/// Line-mode child process. A timed-out or dead child is killed and
/// respawned on the next call, since request/response pairing is lost.
class SubprocessTransport final : public Transport {
  public:
    SubprocessTransport(std::string command, std::chrono::milliseconds timeout);
    ~SubprocessTransport() override;
    SubprocessTransport(const SubprocessTransport&) = delete;
    SubprocessTransport& operator=(const SubprocessTransport&) = delete;

    nlohmann::json call(const nlohmann::json& request) override;
    [[nodiscard]] std::string describe() const override { return "exec:" + command_; }
    bool alive() override;

  private:
    void spawn();
    void terminate();
    std::string read_line(std::chrono::steady_clock::time_point deadline);

    std::string command_;
    std::chrono::milliseconds timeout_;
    std::mutex mutex_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// Answers from recorded request/response pairs, matched on the canonical
/// request JSON. Unknown requests get a provider-side {"error": ...}.
class ReplayTransport final : public Transport {
  public:
    explicit ReplayTransport(const std::filesystem::path& fixture);
    explicit ReplayTransport(std::map<std::string, nlohmann::json> recorded, std::string name = "replay");
    nlohmann::json call(const nlohmann::json& request) override;
    [[nodiscard]] std::string describe() const override { return name_; }

  private:
    std::map<std::string, nlohmann::json> recorded_;
    std::string name_;
};

class FunctionTransport final : public Transport {
  public:
    using Handler = std::function<nlohmann::json(const nlohmann::json&)>;
    explicit FunctionTransport(Handler handler, std::string name = "in-process")
        : handler_(std::move(handler)), name_(std::move(name))
    {}
    nlohmann::json call(const nlohmann::json& request) override { return handler_(request); }
    [[nodiscard]] std::string describe() const override { return name_; }

  private:
    Handler handler_;
    std::string name_;
};

/// Builds the transport for a non-builtin endpoint.
std::shared_ptr<Transport> make_transport(const EndpointConfig& config);

/// Calls `transport`, retrying TransportError up to `retries` extra times.
nlohmann::json call_with_retries(Transport& transport, const nlohmann::json& request, int retries);

}  // namespace elr
