#pragma once

#include <set>

#include "restprobe/sims/sim_api.hpp"

namespace restprobe::sims {

/// Three-operation shop: product search, add-to-cart, checkout. The OAS
/// says nothing about it, but checkout only succeeds once the cart is
/// non-empty, and cart additions need a catalog productId that only search
/// responses reveal.
class SimEComm : public SimApi {
public:
    struct Product {
        std::int64_t id;
        std::string product_name;
        double price;
    };

    explicit SimEComm(std::uint64_t seed = 0);

    std::string name() const override { return "ecomm"; }
    std::string openapi_yaml() const override;
    BackendResponse execute(const ConcreteRequest& request) override;
    void reset() override;

    static const std::vector<Product>& catalog();

    std::size_t cart_size() const { return cart_.size(); }
    int purchases() const { return purchases_; }

private:
    BackendResponse handle_search(const ConcreteRequest& req);
    BackendResponse handle_add(const ConcreteRequest& req);
    BackendResponse handle_checkout();

    std::multiset<std::int64_t> cart_;
    int purchases_ = 0;
};

}  // namespace restprobe::sims
