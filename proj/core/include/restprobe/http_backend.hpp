#pragma once

#include <memory>
#include <string>

#include "restprobe/interaction.hpp"

namespace restprobe {

/// Plain HTTP/1.1 client backend. Redirects are not followed; timeouts and
/// connection failures surface as transport errors on the Interaction.
class HttpBackend : public Backend {
public:
    struct Options {
        std::string base_url;  // scheme://host[:port][/base/path]
        double timeout_s = 10.0;
    };

    explicit HttpBackend(Options options);
    ~HttpBackend() override;

    BackendResponse execute(const ConcreteRequest& request) override;

    /// True when the host answers HTTP at all, whatever the status code.
    bool reachable();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace restprobe
