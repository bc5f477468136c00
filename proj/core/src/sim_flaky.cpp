#include "restprobe/sims/flaky.hpp"

#include <cstdlib>
#include <sstream>

namespace restprobe::sims {

using detail::json_response;
using detail::parse_int;
using detail::query_value;

BackendResponse SimFlaky5xx::execute(const ConcreteRequest& req) {
    if (req.path != "/tools/convert") return json_response(404, {{"error", "no such route"}});
    if (req.method != oas::HttpMethod::Get)
        return json_response(405, {{"error", "method not allowed"}});

    const std::string* raw = query_value(req, "level");
    if (!raw) return json_response(400, {{"error", "missing required parameter level"}});
    const auto level = parse_int(*raw);
    if (!level) return json_response(400, {{"error", "level must be an integer"}});

    if (*level < kHiddenLow || *level > kHiddenHigh) {
        ++failures_;
        std::ostringstream body;
        body << "conversion worker crashed: buffer 0x" << std::hex << (0x3fa90000u + failures_)
             << std::dec << " at offset " << (std::llabs(*level) * 31 + 7) << " (job " << failures_
             << ")";
        BackendResponse resp;
        resp.status = 500;
        resp.body = body.str();
        resp.headers = {{"Content-Type", "text/plain"}};
        return resp;
    }
    return json_response(200, {{"result", *level * 2}});
}

std::string SimFlaky5xx::openapi_yaml() const {
    return R"(openapi: "3.0.0"
info:
  version: 1.0.0
  title: "Unit Converter"
servers:
  - url: http://sim.invalid/v1
paths:
  /tools/convert:
    get:
      summary: "Convert a level reading"
      operationId: convertLevel
      parameters:
        - name: level
          in: query
          required: true
          schema:
            type: integer
            minimum: 0
            maximum: 100
      responses:
        '200':
          description: "Converted value"
          content:
            application/json:
              schema:
                type: object
                properties:
                  result:
                    type: integer
)";
}

}  // namespace restprobe::sims
