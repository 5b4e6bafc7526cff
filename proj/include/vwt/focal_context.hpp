#pragma once

#include "vwt/java_syntax.hpp"
#include "vwt/types.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vwt {

/// Identifies the vulnerable method inside its class. Without parameter
/// types the name alone must be unique. A method name equal to the class
/// name selects a constructor.
struct MethodLocator {
    std::string class_name;
    std::string method_name;
    std::optional<std::vector<std::string>> parameter_types;

    std::string describe() const;
};

/// Syntax-tree fragments of one class, sorted into the bins the context
/// levels draw from. Lists keep source order. Header entries end with
/// kElisionMarker in place of their body.
struct FragmentBins {
    std::string package_decl;
    std::string class_decl_header;
    std::string vulnerable_method;
    std::vector<std::string> constructor_headers;
    std::vector<std::string> method_headers;
    std::vector<std::string> field_decls;
    /// Not part of any level; only emitted with AssembleOptions::include_imports.
    std::vector<std::string> imports;
    /// An enum body needs a ';' before members when its constants are omitted.
    bool enum_body = false;
    /// field_decls[0] is the enum constant list.
    bool enum_constants_first = false;
};

inline constexpr std::string_view kElisionMarker = " { /* ... */ }";

struct FocalContext {
    ContextLevel level = ContextLevel::L0;
    std::string snippet;
    std::set<std::string> fragments_used;
};

struct AssembleOptions {
    bool include_imports = false;
};

/// Throws ParseError when the source does not parse and LocatorError when
/// the locator matches no method or more than one.
FragmentBins extract_fragments(std::string_view source, const MethodLocator& locator);

/// Members are ordered fields, constructors, method headers, then the
/// vulnerable method, one blank line apart.
FocalContext assemble_context(const FragmentBins& bins, ContextLevel level,
                              const AssembleOptions& options = {});

/// Member of `type` selected by the locator. Throws LocatorError.
const java::MemberDecl& locate_method(const java::CompilationUnit& unit,
                                      const MethodLocator& locator);

/// Top-level type named by the locator. Throws LocatorError.
const java::TypeDecl& locate_type(const java::CompilationUnit& unit, std::string_view class_name);

} // namespace vwt
