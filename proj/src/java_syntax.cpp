#include "vwt/java_syntax.hpp"

#include "vwt/error.hpp"
#include "vwt/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace vwt::java {

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) != 0 || c == '_' || c == '$' || c >= 0x80;
}

bool is_ident_part(unsigned char c) {
    return is_ident_start(c) || std::isdigit(c) != 0;
}

[[noreturn]] void fail_at(std::string_view source, std::size_t offset, const std::string& what) {
    auto lc = text::line_column(source, offset);
    throw ParseError(what, lc.line, lc.column);
}

// Scans a quoted literal starting at `i` (the opening quote). Returns the
// offset one past the closing quote.
std::size_t scan_quoted(std::string_view s, std::size_t i, char quote, LexMode mode) {
    std::size_t j = i + 1;
    while (j < s.size()) {
        char c = s[j];
        if (c == '\\') {
            j += 2;
            continue;
        }
        if (c == quote) return j + 1;
        if (c == '\n') break;
        ++j;
    }
    if (mode == LexMode::lenient) return std::min(j, s.size());
    fail_at(s, i, quote == '"' ? "unterminated string literal" : "unterminated character literal");
}

} // namespace

LexResult lex(std::string_view s, LexMode mode) {
    LexResult out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c) != 0) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && s[i + 1] == '/') {
            std::size_t end = s.find('\n', i);
            if (end == std::string_view::npos) end = n;
            out.comments.push_back({i, end});
            i = end;
            continue;
        }
        if (c == '/' && i + 1 < n && s[i + 1] == '*') {
            std::size_t end = s.find("*/", i + 2);
            if (end == std::string_view::npos) {
                if (mode == LexMode::strict) fail_at(s, i, "unterminated block comment");
                end = n - 2;
            }
            out.comments.push_back({i, end + 2});
            i = end + 2;
            continue;
        }
        if (c == '"' && s.substr(i, 3) == "\"\"\"") {
            std::size_t j = i + 3;
            while (j < n && s.substr(j, 3) != "\"\"\"") j += (s[j] == '\\') ? 2 : 1;
            if (j >= n) {
                if (mode == LexMode::strict) fail_at(s, i, "unterminated text block");
                j = n - 3;
            }
            out.tokens.push_back({TokenKind::text_block, i, j + 3});
            i = j + 3;
            continue;
        }
        if (c == '"' || c == '\'') {
            std::size_t end = scan_quoted(s, i, static_cast<char>(c), mode);
            out.tokens.push_back({c == '"' ? TokenKind::string : TokenKind::character, i, end});
            i = end;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && is_ident_part(static_cast<unsigned char>(s[j]))) ++j;
            out.tokens.push_back({TokenKind::identifier, i, j});
            i = j;
            continue;
        }
        if (std::isdigit(c) != 0 ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])) != 0)) {
            std::size_t j = i + 1;
            while (j < n) {
                const auto d = static_cast<unsigned char>(s[j]);
                if (std::isalnum(d) != 0 || d == '_' || d == '.') {
                    ++j;
                } else if ((d == '+' || d == '-') &&
                           (s[j - 1] == 'e' || s[j - 1] == 'E' || s[j - 1] == 'p' ||
                            s[j - 1] == 'P')) {
                    ++j;
                } else {
                    break;
                }
            }
            out.tokens.push_back({TokenKind::number, i, j});
            i = j;
            continue;
        }
        out.tokens.push_back({TokenKind::punct, i, i + 1});
        ++i;
    }
    return out;
}

std::string_view slice(std::string_view source, SourceRange range) {
    return source.substr(range.begin, range.end - range.begin);
}

std::string_view indentation_at(std::string_view source, std::size_t offset) {
    std::size_t line_start = source.rfind('\n', offset == 0 ? 0 : offset - 1);
    line_start = (line_start == std::string_view::npos || offset == 0) ? 0 : line_start + 1;
    std::size_t j = line_start;
    while (j < source.size() && (source[j] == ' ' || source[j] == '\t')) ++j;
    return source.substr(line_start, j - line_start);
}

namespace {

constexpr std::array kModifiers{
    std::string_view{"public"},    std::string_view{"protected"}, std::string_view{"private"},
    std::string_view{"static"},    std::string_view{"final"},     std::string_view{"abstract"},
    std::string_view{"native"},    std::string_view{"synchronized"},
    std::string_view{"transient"}, std::string_view{"volatile"},  std::string_view{"strictfp"},
    std::string_view{"default"},   std::string_view{"sealed"},
};

class Parser {
public:
    explicit Parser(std::string_view source) : src_(source) {
        LexResult lexed = lex(source);
        toks_ = std::move(lexed.tokens);
        comments_ = std::move(lexed.comments);
        match_brackets();
    }

    CompilationUnit parse_unit() {
        CompilationUnit unit;
        std::size_t i = 0;
        if (is_word(i, "package")) {
            std::size_t semi = find_punct(i, ';');
            unit.package_decl = SourceRange{toks_[i].begin, toks_[semi].end};
            i = semi + 1;
        }
        while (i < toks_.size() && (is_word(i, "import") || is_punct(i, ';'))) {
            if (is_punct(i, ';')) {
                ++i;
                continue;
            }
            std::size_t semi = find_punct(i, ';');
            unit.imports.push_back({toks_[i].begin, toks_[semi].end});
            i = semi + 1;
        }
        while (i < toks_.size()) {
            if (is_punct(i, ';')) {
                ++i;
                continue;
            }
            std::size_t close = 0;
            unit.types.push_back(parse_type(i, close));
            i = close + 1;
        }
        if (unit.types.empty()) fail_at(src_, src_.size(), "no type declaration found");
        return unit;
    }

private:
    std::string_view tok_text(std::size_t i) const {
        return src_.substr(toks_[i].begin, toks_[i].end - toks_[i].begin);
    }

    bool is_punct(std::size_t i, char c) const {
        return i < toks_.size() && toks_[i].kind == TokenKind::punct && src_[toks_[i].begin] == c;
    }

    bool is_word(std::size_t i, std::string_view w) const {
        return i < toks_.size() && toks_[i].kind == TokenKind::identifier && tok_text(i) == w;
    }

    bool is_identifier(std::size_t i) const {
        return i < toks_.size() && toks_[i].kind == TokenKind::identifier;
    }

    [[noreturn]] void fail_tok(std::size_t i, const std::string& what) const {
        fail_at(src_, i < toks_.size() ? toks_[i].begin : src_.size(), what);
    }

    void match_brackets() {
        match_.assign(toks_.size(), 0);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            if (toks_[i].kind != TokenKind::punct) continue;
            char c = src_[toks_[i].begin];
            if (c == '(' || c == '[' || c == '{') {
                stack.push_back(i);
            } else if (c == ')' || c == ']' || c == '}') {
                char open = c == ')' ? '(' : c == ']' ? '[' : '{';
                if (stack.empty() || src_[toks_[stack.back()].begin] != open) {
                    fail_tok(i, std::string("unbalanced '") + c + "'");
                }
                match_[stack.back()] = i;
                match_[i] = stack.back();
                stack.pop_back();
            }
        }
        if (!stack.empty()) {
            fail_tok(stack.back(), std::string("unclosed '") + src_[toks_[stack.back()].begin] + "'");
        }
    }

    std::size_t find_punct(std::size_t from, char c) const {
        for (std::size_t i = from; i < toks_.size(); ++i) {
            if (is_punct(i, c)) return i;
        }
        fail_tok(from, std::string("expected '") + c + "'");
    }

    std::size_t skip_annotation(std::size_t i) const {
        // '@' Name ('.' Name)* [ '(' ... ')' ]
        std::size_t j = i + 1;
        if (!is_identifier(j)) fail_tok(i, "malformed annotation");
        ++j;
        while (is_punct(j, '.') && is_identifier(j + 1)) j += 2;
        if (is_punct(j, '(')) j = match_[j] + 1;
        return j;
    }

    bool at_annotation(std::size_t i) const {
        return is_punct(i, '@') && !is_word(i + 1, "interface");
    }

    std::size_t skip_annotations(std::size_t i) const {
        while (at_annotation(i)) i = skip_annotation(i);
        return i;
    }

    bool is_modifier(std::size_t i) const {
        if (!is_identifier(i)) return false;
        auto t = tok_text(i);
        return std::find(kModifiers.begin(), kModifiers.end(), t) != kModifiers.end();
    }

    std::size_t skip_modifiers(std::size_t i) const {
        for (;;) {
            if (at_annotation(i)) {
                i = skip_annotation(i);
            } else if (is_modifier(i)) {
                ++i;
            } else if (is_word(i, "non") && is_punct(i + 1, '-') && is_word(i + 2, "sealed")) {
                i += 3;
            } else {
                return i;
            }
        }
    }

    // Returns the keyword and the index of the token after it, if a type
    // declaration starts at `i`.
    std::optional<std::pair<std::string, std::size_t>> type_keyword(std::size_t i) const {
        if (is_punct(i, '@') && is_word(i + 1, "interface")) return {{"@interface", i + 2}};
        if (is_word(i, "class") || is_word(i, "interface") || is_word(i, "enum")) {
            return {{std::string(tok_text(i)), i + 1}};
        }
        if (is_word(i, "record") && is_identifier(i + 1) &&
            (is_punct(i + 2, '(') || is_punct(i + 2, '<'))) {
            return {{"record", i + 1}};
        }
        return std::nullopt;
    }

    // Start offset including comments attached to the token at `first`: a run
    // of comments separated from the declaration and from each other by no
    // blank line.
    std::size_t attached_start(std::size_t first) const {
        std::size_t begin = toks_[first].begin;
        std::size_t floor = first == 0 ? 0 : toks_[first - 1].end;
        auto it = std::lower_bound(comments_.begin(), comments_.end(), begin,
                                   [](const Comment& c, std::size_t off) { return c.end <= off; });
        while (it != comments_.begin()) {
            const Comment& c = *(it - 1);
            if (c.begin < floor) break;
            auto gap = src_.substr(c.end, begin - c.end);
            if (text::count_occurrences(gap, "\n") > 1 || !text::trim(gap).empty()) break;
            begin = c.begin;
            --it;
        }
        return begin;
    }

    TypeDecl parse_type(std::size_t start, std::size_t& close_out) {
        std::size_t j = skip_modifiers(start);
        auto kw = type_keyword(j);
        if (!kw) fail_tok(j, "expected a type declaration");
        TypeDecl type;
        type.keyword = kw->first;
        j = kw->second;
        if (!is_identifier(j)) fail_tok(j, "expected a type name");
        type.name = std::string(tok_text(j));
        std::size_t k = j + 1;
        while (k < toks_.size() && !is_punct(k, '{')) {
            if (is_punct(k, '(') || is_punct(k, '[')) k = match_[k];
            if (is_punct(k, ';') || is_punct(k, '}')) fail_tok(k, "expected '{' after type header");
            ++k;
        }
        if (k >= toks_.size()) fail_tok(j, "expected '{' after type header");
        std::size_t close = match_[k];
        type.header = {toks_[start].begin, toks_[k - 1].end};
        type.body = {toks_[k].begin, toks_[close].end};
        type.extent = {attached_start(start), toks_[close].end};
        type.members = parse_body(k, close, type.keyword, type.name);
        close_out = close;
        return type;
    }

    std::vector<MemberDecl> parse_body(std::size_t open, std::size_t close,
                                       const std::string& keyword, const std::string& class_name) {
        std::vector<MemberDecl> members;
        std::size_t i = open + 1;
        if (keyword == "enum") {
            std::size_t k = i;
            while (k < close && !is_punct(k, ';')) {
                if (is_punct(k, '(') || is_punct(k, '[') || is_punct(k, '{')) k = match_[k];
                ++k;
            }
            bool only_commas = true;
            for (std::size_t t = i; t < k; ++t) only_commas = only_commas && is_punct(t, ',');
            if (k > i && !only_commas) {
                MemberDecl m;
                m.kind = MemberKind::enum_constants;
                std::size_t last = k < close ? k : k - 1;
                m.declaration = {toks_[i].begin, toks_[last].end};
                m.header = m.declaration;
                m.extent = {attached_start(i), toks_[last].end};
                members.push_back(std::move(m));
            }
            i = k < close ? k + 1 : close;
        }
        while (i < close) {
            if (is_punct(i, ';')) {
                ++i;
                continue;
            }
            std::size_t next = 0;
            members.push_back(parse_member(i, close, class_name, next));
            i = next;
        }
        return members;
    }

    MemberDecl parse_member(std::size_t s, std::size_t close, const std::string& class_name,
                            std::size_t& next) {
        MemberDecl m;
        const std::size_t header_start = skip_annotations(s);
        const std::size_t after_mods = skip_modifiers(header_start);
        if (after_mods >= close) fail_tok(s, "dangling modifiers in type body");

        if (is_punct(after_mods, '{')) {
            std::size_t end = match_[after_mods];
            m.kind = MemberKind::initializer;
            m.has_body = true;
            m.declaration = {toks_[s].begin, toks_[end].end};
            m.header = {toks_[header_start].begin, toks_[after_mods].begin};
            m.extent = {attached_start(s), toks_[end].end};
            next = end + 1;
            return m;
        }

        if (type_keyword(after_mods)) {
            std::size_t type_close = 0;
            TypeDecl nested = parse_type(s, type_close);
            m.kind = MemberKind::nested_type;
            m.name = nested.name;
            m.has_body = true;
            m.declaration = {toks_[s].begin, toks_[type_close].end};
            m.header = {toks_[header_start].begin, nested.header.end};
            m.extent = {attached_start(s), toks_[type_close].end};
            m.nested.push_back(std::move(nested));
            next = type_close + 1;
            return m;
        }

        bool assigned = false;
        std::size_t paren = 0;
        bool has_paren = false;
        std::size_t body = 0;
        bool has_body = false;
        std::size_t k = after_mods;
        while (k < close) {
            if (is_punct(k, ';')) break;
            if (is_punct(k, '=')) {
                assigned = true;
            } else if (is_punct(k, '(')) {
                if (!has_paren && !assigned) {
                    paren = k;
                    has_paren = true;
                }
                k = match_[k];
            } else if (is_punct(k, '[')) {
                k = match_[k];
            } else if (is_punct(k, '{')) {
                if (assigned) {
                    k = match_[k];
                } else {
                    body = k;
                    has_body = true;
                    break;
                }
            }
            ++k;
        }
        if (k >= close) fail_tok(s, "unterminated member declaration");

        const std::size_t end = has_body ? match_[body] : k;
        const std::size_t header_last = has_body ? body - 1 : k - 1;
        m.has_body = has_body;
        m.declaration = {toks_[s].begin, toks_[end].end};
        m.header = {toks_[header_start].begin, toks_[header_last].end};
        m.extent = {attached_start(s), toks_[end].end};
        next = end + 1;

        if (has_paren && paren > after_mods && is_identifier(paren - 1)) {
            m.name = std::string(tok_text(paren - 1));
            std::size_t q = after_mods;
            if (is_punct(q, '<')) q = skip_angle(q);
            const bool no_return_type = (q == paren - 1);
            m.kind = (no_return_type && m.name == class_name) ? MemberKind::constructor
                                                              : MemberKind::method;
            m.parameter_types = parse_parameters(paren, match_[paren]);
        } else if (has_body && !assigned && is_identifier(after_mods) &&
                   tok_text(after_mods) == class_name && after_mods + 1 == body) {
            // record compact constructor
            m.kind = MemberKind::constructor;
            m.name = class_name;
        } else {
            m.kind = MemberKind::field;
            m.name = first_declarator_name(after_mods, k);
        }
        return m;
    }

    std::size_t skip_angle(std::size_t i) const {
        int depth = 0;
        for (; i < toks_.size(); ++i) {
            if (is_punct(i, '<')) ++depth;
            if (is_punct(i, '>') && --depth == 0) return i + 1;
            if (is_punct(i, '(') || is_punct(i, '{') || is_punct(i, ';')) return i;
        }
        return i;
    }

    std::string first_declarator_name(std::size_t from, std::size_t end) const {
        std::size_t last_ident = from;
        for (std::size_t i = from; i < end; ++i) {
            if (is_punct(i, '=') || is_punct(i, ',')) break;
            if (is_punct(i, '(') || is_punct(i, '[')) {
                i = match_[i];
                continue;
            }
            if (is_identifier(i)) last_ident = i;
        }
        return is_identifier(last_ident) ? std::string(tok_text(last_ident)) : std::string();
    }

    std::vector<std::string> parse_parameters(std::size_t open, std::size_t close) const {
        std::vector<std::string> types;
        std::vector<std::size_t> current;
        int angle = 0;
        auto flush = [&] {
            if (!current.empty()) types.push_back(parameter_type(current));
            current.clear();
        };
        for (std::size_t i = open + 1; i < close; ++i) {
            if (is_punct(i, '(') || is_punct(i, '[') || is_punct(i, '{')) {
                for (std::size_t t = i; t <= match_[i]; ++t) current.push_back(t);
                i = match_[i];
                continue;
            }
            if (is_punct(i, '<')) ++angle;
            if (is_punct(i, '>')) --angle;
            if (is_punct(i, ',') && angle == 0) {
                flush();
                continue;
            }
            current.push_back(i);
        }
        flush();
        return types;
    }

    std::string parameter_type(const std::vector<std::size_t>& idx) const {
        std::size_t a = 0;
        std::size_t b = idx.size();
        // trailing dims after the name: `String args[]`
        int dims = 0;
        while (b >= 2 && is_punct(idx[b - 1], ']') && is_punct(idx[b - 2], '[')) {
            ++dims;
            b -= 2;
        }
        if (b > 0 && is_identifier(idx[b - 1])) --b;  // parameter name
        std::string spelled;
        for (std::size_t t = a; t < b; ++t) {
            if (!spelled.empty()) spelled.push_back(' ');
            spelled.append(tok_text(idx[t]));
        }
        std::string type = normalize_type(spelled);
        for (int d = 0; d < dims; ++d) type += "[]";
        return type;
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::vector<Comment> comments_;
    std::vector<std::size_t> match_;
};

bool word_token(const Token& t) {
    return t.kind != TokenKind::punct;
}

std::string join_tokens(std::string_view source, const std::vector<Token>& toks, std::size_t a,
                        std::size_t b) {
    std::string out;
    for (std::size_t i = a; i < b; ++i) {
        if (i > a && word_token(toks[i]) && word_token(toks[i - 1])) {
            out.push_back(' ');
        }
        out.append(source.substr(toks[i].begin, toks[i].end - toks[i].begin));
    }
    return out;
}

std::string strip_qualifiers(std::string_view type) {
    auto lexed = lex(type, LexMode::lenient);
    const auto& t = lexed.tokens;
    std::vector<Token> kept;
    for (std::size_t i = 0; i < t.size(); ++i) {
        bool qualifier = t[i].kind == TokenKind::identifier && i + 2 < t.size() &&
                         type[t[i + 1].begin] == '.' && t[i + 1].kind == TokenKind::punct &&
                         t[i + 2].kind == TokenKind::identifier;
        if (qualifier) {
            ++i;  // drop the dot as well
            continue;
        }
        kept.push_back(t[i]);
    }
    return join_tokens(type, kept, 0, kept.size());
}

std::string erasure(std::string_view type) {
    std::string out;
    int depth = 0;
    for (char c : type) {
        if (c == '<') {
            ++depth;
        } else if (c == '>') {
            --depth;
        } else if (depth == 0) {
            out.push_back(c);
        }
    }
    return out;
}

} // namespace

CompilationUnit parse(std::string_view source) {
    Parser parser(source);
    return parser.parse_unit();
}

std::string normalize_type(std::string_view type) {
    auto lexed = lex(type, LexMode::lenient);
    const auto& t = lexed.tokens;
    std::vector<Token> kept;
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto word = type.substr(t[i].begin, t[i].end - t[i].begin);
        if (word == "@" && i + 1 < t.size() && t[i + 1].kind == TokenKind::identifier) {
            ++i;
            while (i + 2 < t.size() && type[t[i + 1].begin] == '.' &&
                   t[i + 2].kind == TokenKind::identifier) {
                i += 2;
            }
            if (i + 1 < t.size() && type[t[i + 1].begin] == '(') {
                int depth = 0;
                for (++i; i < t.size(); ++i) {
                    char c = type[t[i].begin];
                    if (t[i].kind == TokenKind::punct && c == '(') ++depth;
                    if (t[i].kind == TokenKind::punct && c == ')' && --depth == 0) break;
                }
            }
            continue;
        }
        if (t[i].kind == TokenKind::identifier && word == "final") continue;
        kept.push_back(t[i]);
    }
    return join_tokens(type, kept, 0, kept.size());
}

bool parameter_types_match(const std::vector<std::string>& declared,
                           const std::vector<std::string>& requested) {
    if (declared.size() != requested.size()) return false;
    for (std::size_t i = 0; i < declared.size(); ++i) {
        const std::string d = normalize_type(declared[i]);
        const std::string r = normalize_type(requested[i]);
        if (d == r) continue;
        const std::string ds = strip_qualifiers(d);
        const std::string rs = strip_qualifiers(r);
        if (ds == rs) continue;
        if (r.find('<') == std::string::npos && erasure(ds) == rs) continue;
        return false;
    }
    return true;
}

std::size_t declared_member_count(const TypeDecl& type) {
    return static_cast<std::size_t>(
        std::count_if(type.members.begin(), type.members.end(),
                      [](const MemberDecl& m) { return m.kind != MemberKind::initializer; }));
}

std::string signature_of(const MemberDecl& member) {
    return member.name + "(" + text::join(member.parameter_types, ", ") + ")";
}

} // namespace vwt::java
