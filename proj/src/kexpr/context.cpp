#include "casbridge/kexpr/context.hpp"

#include <atomic>

namespace casbridge::kexpr {

namespace {
std::atomic<std::uint64_t> next_context_id{1};
}

LocalContext::LocalContext() : id_(next_context_id.fetch_add(1)) {}

Name LocalContext::fresh_unique() { return Name{id_, ++counter_}; }

KExpr LocalContext::fresh(const Name& pretty, const KExpr& type, BinderInfo bi) {
    return KExpr::local(fresh_unique(), pretty, bi, type);
}

KExpr LocalContext::declare(const Name& pretty, const KExpr& type, BinderInfo bi) {
    KExpr l = fresh(pretty, type, bi);
    locals_.push_back(l);
    return l;
}

std::optional<KExpr> LocalContext::lookup(const Name& pretty) const {
    for (auto it = locals_.rbegin(); it != locals_.rend(); ++it)
        if (it->pretty_name() == pretty) return *it;
    return std::nullopt;
}

}  // namespace casbridge::kexpr
