#include "casbridge/kexpr/name.hpp"

#include <algorithm>
#include <cctype>

namespace casbridge::kexpr {

namespace {

bool is_plain_text(const std::string& s) {
    if (s.empty()) return false;
    if (std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80;
    }) && s.find("\xc2\xab") == std::string::npos && s.find("\xc2\xbb") == std::string::npos;
}

constexpr std::string_view kOpen = "\xc2\xab";   // «
constexpr std::string_view kClose = "\xc2\xbb";  // »

}  // namespace

Name::Name(std::vector<Segment> segments) : segments_(std::move(segments)) {}
Name::Name(std::initializer_list<Segment> segments) : segments_(segments) {}

Name Name::parse(std::string_view text) {
    std::vector<Segment> segs;
    std::size_t i = 0;
    if (text.empty()) throw NameError("empty name");
    while (true) {
        if (text.substr(i, kOpen.size()) == kOpen) {
            i += kOpen.size();
            std::string seg;
            while (true) {
                if (i >= text.size()) throw NameError("unterminated quoted name segment");
                if (text[i] == '\\' && i + 1 < text.size()) {
                    if (text.substr(i + 1, kClose.size()) == kClose) {
                        seg += kClose;
                        i += 1 + kClose.size();
                    } else {
                        seg += text[i + 1];
                        i += 2;
                    }
                    continue;
                }
                if (text.substr(i, kClose.size()) == kClose) {
                    i += kClose.size();
                    break;
                }
                seg += text[i++];
            }
            segs.emplace_back(std::move(seg));
        } else {
            std::size_t j = text.find('.', i);
            if (j == std::string_view::npos) j = text.size();
            std::string seg(text.substr(i, j - i));
            if (seg.empty()) throw NameError("empty name segment in '" + std::string(text) + "'");
            if (std::all_of(seg.begin(), seg.end(), [](unsigned char c) { return std::isdigit(c); })) {
                segs.emplace_back(static_cast<std::uint64_t>(std::stoull(seg)));
            } else {
                segs.emplace_back(std::move(seg));
            }
            i = j;
        }
        if (i == text.size()) break;
        if (text[i] != '.') throw NameError("expected '.' in name '" + std::string(text) + "'");
        ++i;
        if (i == text.size()) throw NameError("trailing '.' in name");
    }
    return Name(std::move(segs));
}

Name Name::append(Segment s) const {
    auto segs = segments_;
    segs.push_back(std::move(s));
    return Name(std::move(segs));
}

Name Name::prefix() const {
    if (segments_.empty()) return {};
    return Name(std::vector<Segment>(segments_.begin(), segments_.end() - 1));
}

std::string Name::last_text() const {
    if (segments_.empty()) return {};
    const auto& s = segments_.back();
    if (auto* t = std::get_if<std::string>(&s)) return *t;
    return std::to_string(std::get<std::uint64_t>(s));
}

std::string Name::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i) out += '.';
        if (auto* n = std::get_if<std::uint64_t>(&segments_[i])) {
            out += std::to_string(*n);
            continue;
        }
        const auto& s = std::get<std::string>(segments_[i]);
        if (is_plain_text(s)) {
            out += s;
            continue;
        }
        out += kOpen;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (s[k] == '\\') {
                out += "\\\\";
            } else if (s.compare(k, kClose.size(), kClose) == 0) {
                out += "\\";
                out += kClose;
                k += kClose.size() - 1;
            } else {
                out += s[k];
            }
        }
        out += kClose;
    }
    return out;
}

std::strong_ordering operator<=>(const Name& a, const Name& b) {
    const auto& x = a.segments_;
    const auto& y = b.segments_;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i].index() != y[i].index()) return x[i].index() <=> y[i].index();
        if (auto* s = std::get_if<std::string>(&x[i])) {
            auto c = s->compare(std::get<std::string>(y[i]));
            if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
        } else {
            auto c = std::get<std::uint64_t>(x[i]) <=> std::get<std::uint64_t>(y[i]);
            if (c != 0) return c;
        }
    }
    return x.size() <=> y.size();
}

}  // namespace casbridge::kexpr
