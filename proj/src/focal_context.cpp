#include "vwt/focal_context.hpp"

#include "vwt/error.hpp"
#include "vwt/text.hpp"

namespace vwt {

std::string MethodLocator::describe() const {
    std::string out = class_name + "#" + method_name;
    if (parameter_types) out += "(" + text::join(*parameter_types, ", ") + ")";
    return out;
}

const java::TypeDecl& locate_type(const java::CompilationUnit& unit, std::string_view class_name) {
    for (const auto& type : unit.types) {
        if (type.name == class_name) return type;
    }
    throw LocatorError(LocatorError::Kind::not_found,
                       "top-level type '" + std::string(class_name) + "' not found");
}

const java::MemberDecl& locate_method(const java::CompilationUnit& unit,
                                      const MethodLocator& locator) {
    const java::TypeDecl& type = locate_type(unit, locator.class_name);
    const bool wants_constructor = locator.method_name == type.name;
    std::vector<const java::MemberDecl*> hits;
    for (const auto& member : type.members) {
        const auto wanted_kind =
            wants_constructor ? java::MemberKind::constructor : java::MemberKind::method;
        if (member.kind != wanted_kind || member.name != locator.method_name) continue;
        if (locator.parameter_types &&
            !java::parameter_types_match(member.parameter_types, *locator.parameter_types)) {
            continue;
        }
        hits.push_back(&member);
    }
    if (hits.empty()) {
        throw LocatorError(LocatorError::Kind::not_found,
                           "method " + locator.describe() + " not found");
    }
    if (hits.size() > 1) {
        std::vector<std::string> sigs;
        for (const auto* m : hits) sigs.push_back(java::signature_of(*m));
        throw LocatorError(LocatorError::Kind::ambiguous,
                           "locator " + locator.describe() + " is ambiguous between " +
                               text::join(sigs, " and "));
    }
    return *hits.front();
}

namespace {

std::string with_indent(std::string_view source, std::size_t line_offset, std::string_view body) {
    std::string out(java::indentation_at(source, line_offset));
    out.append(body);
    return out;
}

std::string verbatim(std::string_view source, java::SourceRange extent) {
    return with_indent(source, extent.begin, java::slice(source, extent));
}

std::string elided_header(std::string_view source, const java::MemberDecl& member) {
    std::string out = with_indent(source, member.declaration.begin, java::slice(source, member.header));
    out.append(kElisionMarker);
    return out;
}

} // namespace

FragmentBins extract_fragments(std::string_view raw_source, const MethodLocator& locator) {
    const std::string source = text::replace_all(std::string(raw_source), "\r\n", "\n");
    const java::CompilationUnit unit = java::parse(source);
    const java::TypeDecl& type = locate_type(unit, locator.class_name);
    const java::MemberDecl& target = locate_method(unit, locator);

    FragmentBins bins;
    if (unit.package_decl) bins.package_decl = std::string(java::slice(source, *unit.package_decl));
    for (const auto& imp : unit.imports) bins.imports.emplace_back(java::slice(source, imp));
    bins.class_decl_header =
        verbatim(source, java::SourceRange{type.extent.begin, type.header.end});
    bins.enum_body = type.keyword == "enum";

    for (const auto& member : type.members) {
        if (&member == &target) {
            bins.vulnerable_method = verbatim(source, member.extent);
            continue;
        }
        switch (member.kind) {
        case java::MemberKind::enum_constants:
            bins.enum_constants_first = bins.field_decls.empty();
            [[fallthrough]];
        case java::MemberKind::field:
            bins.field_decls.push_back(verbatim(source, member.extent));
            break;
        case java::MemberKind::constructor:
            bins.constructor_headers.push_back(elided_header(source, member));
            break;
        case java::MemberKind::method:
        case java::MemberKind::nested_type:
            bins.method_headers.push_back(elided_header(source, member));
            break;
        case java::MemberKind::initializer:
            break;
        }
    }
    return bins;
}

FocalContext assemble_context(const FragmentBins& bins, ContextLevel level,
                              const AssembleOptions& options) {
    FocalContext ctx;
    ctx.level = level;
    const int lv = level_index(level);

    std::vector<std::string> members;
    auto take = [&](const std::vector<std::string>& bin, const char* prefix) {
        for (std::size_t i = 0; i < bin.size(); ++i) {
            members.push_back(bin[i]);
            ctx.fragments_used.insert(std::string(prefix) + "[" + std::to_string(i) + "]");
        }
    };
    const bool constants_included = lv >= 3 && bins.enum_constants_first;
    if (bins.enum_body && !constants_included) members.emplace_back("    ;");
    if (lv >= 3) take(bins.field_decls, "field");
    if (lv >= 1) take(bins.constructor_headers, "constructor");
    if (lv >= 2) take(bins.method_headers, "method");
    members.push_back(bins.vulnerable_method);
    ctx.fragments_used.insert("vulnerable_method");
    ctx.fragments_used.insert("class_header");

    std::string out;
    if (!bins.package_decl.empty()) {
        out += bins.package_decl + "\n\n";
        ctx.fragments_used.insert("package");
    }
    if (options.include_imports && !bins.imports.empty()) {
        for (std::size_t i = 0; i < bins.imports.size(); ++i) {
            out += bins.imports[i] + "\n";
            ctx.fragments_used.insert("import[" + std::to_string(i) + "]");
        }
        out += "\n";
    }
    out += bins.class_decl_header + " {\n";
    out += text::join(members, "\n\n");
    out += "\n}\n";
    ctx.snippet = std::move(out);
    return ctx;
}

} // namespace vwt
