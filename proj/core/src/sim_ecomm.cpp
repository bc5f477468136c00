#include "restprobe/sims/ecomm.hpp"

#include <algorithm>
#include <cctype>

namespace restprobe::sims {

using detail::json_response;
using detail::parse_int;
using detail::query_value;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

SimEComm::SimEComm(std::uint64_t) {}

const std::vector<SimEComm::Product>& SimEComm::catalog() {
    static const std::vector<Product> products = {
        {517, "Iliad", 9.50},
        {642, "Odyssey", 12.00},
        {307, "Aeneid", 11.25},
        {815, "1984", 6.40},
        {123, "Catch-22", 8.15},
        {998, "Fahrenheit 451", 7.99},
        {256, "Slaughterhouse-Five", 10.10},
        {734, "2001: A Space Odyssey", 13.37},
    };
    return products;
}

void SimEComm::reset() {
    cart_.clear();
    purchases_ = 0;
}

BackendResponse SimEComm::execute(const ConcreteRequest& req) {
    using oas::HttpMethod;
    const bool known_path = req.path == "/products/search" || req.path == "/addProductToCart" ||
                            req.path == "/checkout";
    if (!known_path) return json_response(404, {{"error", "no such route"}});

    if (req.path == "/products/search") {
        if (req.method != HttpMethod::Get)
            return json_response(405, {{"error", "method not allowed"}});
        return handle_search(req);
    }
    if (req.path == "/addProductToCart") {
        if (req.method != HttpMethod::Post)
            return json_response(405, {{"error", "method not allowed"}});
        return handle_add(req);
    }
    if (req.method != HttpMethod::Post)
        return json_response(405, {{"error", "method not allowed"}});
    return handle_checkout();
}

BackendResponse SimEComm::handle_search(const ConcreteRequest& req) {
    const std::string* keyword = query_value(req, "keyword");
    if (!keyword) return json_response(400, {{"error", "missing required parameter keyword"}});

    const std::string needle = lower(*keyword);
    json matches = json::array();
    for (const auto& p : catalog()) {
        if (lower(p.product_name).find(needle) != std::string::npos) {
            matches.push_back(
                {{"productId", p.id}, {"name", p.product_name}, {"price", p.price}});
        }
    }
    if (matches.empty())
        return json_response(404, {{"error", "no products match keyword '" + *keyword + "'"}});
    return json_response(200, matches);
}

BackendResponse SimEComm::handle_add(const ConcreteRequest& req) {
    const std::string* id_text = query_value(req, "productId");
    if (!id_text) return json_response(400, {{"error", "missing required parameter productId"}});
    const auto id = parse_int(*id_text);
    if (!id) return json_response(400, {{"error", "productId must be an integer"}});

    std::int64_t quantity = 1;  // documented default
    if (const std::string* q = query_value(req, "quantity")) {
        const auto parsed = parse_int(*q);
        if (!parsed) return json_response(400, {{"error", "quantity must be an integer"}});
        quantity = *parsed;
    }
    if (quantity < 1 || quantity > 100)
        return json_response(400, {{"error", "quantity must be between 1 and 100"}});

    const bool exists = std::any_of(catalog().begin(), catalog().end(),
                                    [&](const Product& p) { return p.id == *id; });
    if (!exists) return json_response(404, {{"error", "unknown productId"}});

    for (std::int64_t i = 0; i < quantity; ++i) cart_.insert(*id);
    return json_response(200, {{"cartSize", cart_.size()}});
}

BackendResponse SimEComm::handle_checkout() {
    if (cart_.empty()) return json_response(409, {{"error", "cart is empty"}});
    double total = 0.0;
    for (const auto id : cart_) {
        for (const auto& p : catalog())
            if (p.id == id) total += p.price;
    }
    cart_.clear();
    ++purchases_;
    return json_response(200, {{"orderId", 9000 + purchases_}, {"total", total}});
}

std::string SimEComm::openapi_yaml() const {
    return R"(openapi: "3.0.0"
info:
  version: 1.0.0
  title: "Simple eComm"
servers:
  - url: http://sim.invalid/v1
paths:
  /addProductToCart:
    post:
      summary: "Add product(s) to the cart"
      operationId: addProductToCart
      parameters:
        - name: productId
          in: query
          required: true
          schema:
            type: integer
            format: int64
        - name: quantity
          in: query
          schema:
            type: integer
            default: 1
            minimum: 1
            maximum: 100
      responses:
        '200':
          description: "Product(s) added"
          content:
            application/json:
              schema:
                type: object
                properties:
                  cartSize:
                    type: integer
  /products/search:
    get:
      summary: "Search products by name"
      operationId: productSearch
      parameters:
        - name: keyword
          in: query
          required: true
          schema:
            type: string
      responses:
        '200':
          description: "Matching products"
          content:
            application/json:
              schema:
                type: array
                items:
                  type: object
                  properties:
                    productId:
                      type: integer
                      format: int64
                    name:
                      type: string
                    price:
                      type: number
                      format: float
  /checkout:
    post:
      summary: "Finalize purchase"
      operationId: checkout
      responses:
        '200':
          description: "Purchase completed"
)";
}

}  // namespace restprobe::sims
