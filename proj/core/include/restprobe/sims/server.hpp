#pragma once

#include <memory>

#include "restprobe/sims/sim_api.hpp"

namespace restprobe::sims {

/// Hosts a sim over localhost HTTP so the full wire path can be exercised.
/// Requests are serialized; the sim sees the same call sequence it would
/// see in-process.
class SimServer {
public:
    explicit SimServer(std::unique_ptr<SimApi> sim);
    ~SimServer();

    SimServer(const SimServer&) = delete;
    SimServer& operator=(const SimServer&) = delete;

    /// Binds and serves on a background thread. port 0 picks a free port.
    /// Returns the bound port, or -1 on failure.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace restprobe::sims
