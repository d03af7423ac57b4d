#include "casbridge/kexpr/level.hpp"

#include <algorithm>

namespace casbridge::kexpr {

struct Level::Node {
    LevelKind kind = LevelKind::Zero;
    Level lhs_, rhs_;
    Name name_;
    Node() = default;
};

Level::Level() : node_(nullptr) {}

Level Level::succ(Level l) {
    auto n = std::make_shared<Node>();
    n->kind = LevelKind::Succ;
    n->lhs_ = std::move(l);
    return Level(std::move(n));
}

Level Level::param(Name name) {
    auto n = std::make_shared<Node>();
    n->kind = LevelKind::Param;
    n->name_ = std::move(name);
    return Level(std::move(n));
}

Level Level::max(Level a, Level b) {
    auto n = std::make_shared<Node>();
    n->kind = LevelKind::Max;
    n->lhs_ = std::move(a);
    n->rhs_ = std::move(b);
    return Level(std::move(n));
}

Level Level::of_nat(std::uint64_t n) {
    Level l;
    for (std::uint64_t i = 0; i < n; ++i) l = succ(l);
    return l;
}

LevelKind Level::kind() const { return node_ ? node_->kind : LevelKind::Zero; }

const Level& Level::lhs() const {
    static const Level z;
    return node_ ? node_->lhs_ : z;
}

const Level& Level::rhs() const {
    static const Level z;
    return node_ ? node_->rhs_ : z;
}

const Name& Level::name() const {
    static const Name empty;
    return node_ ? node_->name_ : empty;
}

std::optional<std::uint64_t> Level::to_nat() const {
    switch (kind()) {
        case LevelKind::Zero:
            return 0;
        case LevelKind::Succ: {
            auto v = lhs().to_nat();
            if (!v) return std::nullopt;
            return *v + 1;
        }
        case LevelKind::Param:
            return std::nullopt;
        case LevelKind::Max: {
            auto a = lhs().to_nat();
            auto b = rhs().to_nat();
            if (!a || !b) return std::nullopt;
            return std::max(*a, *b);
        }
    }
    return std::nullopt;
}

bool Level::has_param() const {
    switch (kind()) {
        case LevelKind::Zero:
            return false;
        case LevelKind::Param:
            return true;
        case LevelKind::Succ:
            return lhs().has_param();
        case LevelKind::Max:
            return lhs().has_param() || rhs().has_param();
    }
    return false;
}

Level Level::normalize() const {
    if (auto v = to_nat()) return of_nat(*v);
    switch (kind()) {
        case LevelKind::Succ:
            return succ(lhs().normalize());
        case LevelKind::Max: {
            Level a = lhs().normalize();
            Level b = rhs().normalize();
            if (a == b) return a;
            if (a.to_nat() == std::optional<std::uint64_t>(0)) return b;
            if (b.to_nat() == std::optional<std::uint64_t>(0)) return a;
            return max(a, b);
        }
        default:
            return *this;
    }
}

std::string Level::to_string() const {
    if (auto v = to_nat(); v && kind() != LevelKind::Max) return std::to_string(*v);
    switch (kind()) {
        case LevelKind::Zero:
            return "0";
        case LevelKind::Succ: {
            std::uint64_t k = 0;
            const Level* l = this;
            while (l->kind() == LevelKind::Succ) {
                ++k;
                l = &l->lhs();
            }
            std::string inner = l->to_string();
            if (l->kind() == LevelKind::Max) inner = "(" + inner + ")";
            return inner + "+" + std::to_string(k);
        }
        case LevelKind::Param:
            return name().to_string();
        case LevelKind::Max: {
            auto wrap = [](const Level& x) {
                std::string s = x.to_string();
                return x.kind() == LevelKind::Max || x.kind() == LevelKind::Succ ? "(" + s + ")" : s;
            };
            return "max " + wrap(lhs()) + " " + wrap(rhs());
        }
    }
    return "?";
}

bool operator==(const Level& a, const Level& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case LevelKind::Zero:
            return true;
        case LevelKind::Succ:
            return a.lhs() == b.lhs();
        case LevelKind::Param:
            return a.name() == b.name();
        case LevelKind::Max:
            return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
    return false;
}

bool level_equiv(const Level& a, const Level& b) { return a.normalize() == b.normalize(); }

}  // namespace casbridge::kexpr
