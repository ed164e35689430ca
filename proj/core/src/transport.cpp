#include "elr/transport.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

namespace elr {

using nlohmann::json;

EndpointConfig EndpointConfig::from_json(const json& j)
{
    EndpointConfig c;
    if (j.is_string()) {
        c.endpoint = j.get<std::string>();
        return c;
    }
    c.endpoint = j.value("endpoint", c.endpoint);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(c.timeout.count())));
    if (c.timeout.count() <= 0) {
        throw std::invalid_argument("timeout_ms must be > 0");
    }
    c.retries = j.value("retries", c.retries);
    if (c.retries < 0) {
        throw std::invalid_argument("retries must be >= 0");
    }
    return c;
}

json EndpointConfig::to_json() const
{
    return {{"endpoint", endpoint}, {"timeout_ms", timeout.count()}, {"retries", retries}};
}

// --- HTTP -------------------------------------------------------------------

HttpTransport::HttpTransport(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout)
{
    auto scheme = url_.find("://");
    if (scheme == std::string::npos) {
        throw std::invalid_argument("bad provider URL: " + url_);
    }
    auto slash = url_.find('/', scheme + 3);
    base_ = url_.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url_.substr(slash);
}

json HttpTransport::call(const json& request)
{
    httplib::Client client(base_);
    auto secs = timeout_.count() / 1000;
    auto usecs = (timeout_.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(path_, request.dump(), "application/json");
    if (!res) {
        throw TransportError(url_ + ": " + httplib::to_string(res.error()));
    }
    json body;
    try {
        body = json::parse(res->body);
    } catch (const json::exception&) {
        throw TransportError(url_ + ": HTTP " + std::to_string(res->status) + " with non-JSON body");
    }
    if (res->status != 200 && !body.contains("error")) {
        throw TransportError(url_ + ": HTTP " + std::to_string(res->status));
    }
    return body;
}

bool HttpTransport::alive()
{
    httplib::Client client(base_);
    client.set_connection_timeout(1, 0);
    client.set_read_timeout(1, 0);
    auto res = client.Get("/health");
    return static_cast<bool>(res);
}

// --- subprocess -------------------------------------------------------------

SubprocessTransport::SubprocessTransport(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout)
{
    static const bool ignore_sigpipe = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)ignore_sigpipe;
}

SubprocessTransport::~SubprocessTransport()
{
    std::lock_guard lock(mutex_);
    terminate();
}

void SubprocessTransport::spawn()
{
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) {
        throw TransportError("pipe() failed: " + std::string(std::strerror(errno)));
    }
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw TransportError("pipe() failed: " + std::string(std::strerror(errno)));
    }
    pid_t pid = fork();
    if (pid < 0) {
        throw TransportError("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    buffer_.clear();
}

void SubprocessTransport::terminate()
{
    if (to_child_ >= 0) {
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0) {
        int status = 0;
        // Give a well-behaved child a moment to exit on EOF before killing it.
        for (int i = 0; i < 20; ++i) {
            if (waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            usleep(5000);
        }
        kill(pid_, SIGKILL);
        waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

std::string SubprocessTransport::read_line(std::chrono::steady_clock::time_point deadline)
{
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            throw TransportError(describe() + ": timed out after " + std::to_string(timeout_.count()) + " ms");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        int rc = poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw TransportError(describe() + ": poll failed");
        }
        if (rc == 0) {
            continue;
        }
        char buf[4096];
        auto n = read(from_child_, buf, sizeof buf);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            throw TransportError(describe() + ": provider process closed its output");
        }
        buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

json SubprocessTransport::call(const json& request)
{
    std::lock_guard lock(mutex_);
    if (pid_ <= 0) {
        spawn();
    }
    try {
        auto deadline = std::chrono::steady_clock::now() + timeout_;
        std::string line = request.dump() + "\n";
        std::size_t off = 0;
        while (off < line.size()) {
            auto n = write(to_child_, line.data() + off, line.size() - off);
            if (n < 0 && errno == EINTR) {
                continue;
            }
            if (n <= 0) {
                throw TransportError(describe() + ": cannot write to provider process");
            }
            off += static_cast<std::size_t>(n);
        }
        auto response = read_line(deadline);
        try {
            return json::parse(response);
        } catch (const json::exception&) {
            throw TransportError(describe() + ": provider wrote a non-JSON line");
        }
    } catch (const TransportError&) {
        terminate();
        throw;
    }
}

bool SubprocessTransport::alive()
{
    std::lock_guard lock(mutex_);
    if (pid_ <= 0) {
        try {
            spawn();
        } catch (const TransportError&) {
            return false;
        }
    }
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        terminate();
        return false;
    }
    return true;
}

// --- replay -----------------------------------------------------------------

ReplayTransport::ReplayTransport(const std::filesystem::path& fixture) : name_("replay:" + fixture.string())
{
    std::ifstream in(fixture);
    if (!in) {
        throw std::runtime_error("cannot open replay fixture: " + fixture.string());
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        try {
            auto j = json::parse(line);
            recorded_[j.at("request").dump()] = j.at("response");
        } catch (const json::exception& e) {
            throw std::runtime_error(fixture.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

ReplayTransport::ReplayTransport(std::map<std::string, json> recorded, std::string name)
    : recorded_(std::move(recorded)), name_(std::move(name))
{}

json ReplayTransport::call(const json& request)
{
    auto it = recorded_.find(request.dump());
    if (it == recorded_.end()) {
        return json{{"error", "no recorded response for request"}};
    }
    return it->second;
}

// ---------------------------------------------------------------------------

std::shared_ptr<Transport> make_transport(const EndpointConfig& config)
{
    const auto& e = config.endpoint;
    if (e.rfind("http://", 0) == 0) {
        return std::make_shared<HttpTransport>(e, config.timeout);
    }
    if (e.rfind("exec:", 0) == 0) {
        return std::make_shared<SubprocessTransport>(e.substr(5), config.timeout);
    }
    if (e.rfind("replay:", 0) == 0) {
        return std::make_shared<ReplayTransport>(std::filesystem::path(e.substr(7)));
    }
    throw std::invalid_argument("unrecognized provider endpoint: '" + e + "'");
}

json call_with_retries(Transport& transport, const json& request, int retries)
{
    for (int attempt = 0;; ++attempt) {
        try {
            return transport.call(request);
        } catch (const TransportError&) {
            if (attempt >= retries) {
                throw;
            }
        }
    }
}

}  // namespace elr
