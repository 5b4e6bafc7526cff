#pragma once

// Lexer and declaration-level parser for Java compilation units.
//
// The parser recovers the structure needed for context slicing: package and
// import declarations, top-level type declarations, and the members of each
// type body (fields, constructors, methods, initializer blocks, nested types,
// enum constants). Statement bodies are skipped as balanced brace groups and
// are never parsed.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vwt::java {

enum class TokenKind { identifier, number, string, character, text_block, punct };

struct Token {
    TokenKind kind;
    std::size_t begin;
    std::size_t end;
};

struct Comment {
    std::size_t begin;
    std::size_t end;
};

struct LexResult {
    std::vector<Token> tokens;
    std::vector<Comment> comments;
};

enum class LexMode {
    strict,  ///< unterminated comments or literals raise ParseError
    lenient  ///< unterminated literals end at the end of their line
};

LexResult lex(std::string_view source, LexMode mode = LexMode::strict);

struct SourceRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
};

enum class MemberKind { field, constructor, method, initializer, nested_type, enum_constants };

struct TypeDecl;

struct MemberDecl {
    MemberKind kind = MemberKind::field;
    std::string name;
    std::vector<std::string> parameter_types;  ///< normalized, see normalize_type
    SourceRange extent;       ///< attached leading comments through the end of the member
    SourceRange declaration;  ///< first annotation or modifier through the end
    SourceRange header;       ///< after the leading annotations, up to the body or ';'
    bool has_body = false;
    std::vector<TypeDecl> nested;  ///< the declared type when kind == nested_type
};

struct TypeDecl {
    std::string keyword;  ///< class, interface, enum, record or @interface
    std::string name;
    SourceRange extent;  ///< attached leading comments through the closing brace
    SourceRange header;  ///< annotations and modifiers up to the opening brace
    SourceRange body;    ///< opening through closing brace
    std::vector<MemberDecl> members;
};

struct CompilationUnit {
    std::optional<SourceRange> package_decl;
    std::vector<SourceRange> imports;
    std::vector<TypeDecl> types;
};

/// Throws ParseError carrying the line and column of the offending token.
CompilationUnit parse(std::string_view source);

/// Canonical spelling of a type: annotations and `final` dropped, whitespace
/// removed except between adjacent words ("java.util.List <String>" ->
/// "java.util.List<String>").
std::string normalize_type(std::string_view type);

/// True when a declared parameter list satisfies a requested one. Each pair
/// matches on the normalized spelling, on the spelling with package
/// qualifiers removed, or on the erasure when the request has no type
/// arguments.
bool parameter_types_match(const std::vector<std::string>& declared,
                           const std::vector<std::string>& requested);

std::string_view slice(std::string_view source, SourceRange range);

/// Leading spaces and tabs of the line containing `offset`.
std::string_view indentation_at(std::string_view source, std::size_t offset);

/// Number of declarations a type body contributes as members: fields,
/// constructors, methods, nested types and the enum constant list.
std::size_t declared_member_count(const TypeDecl& type);

/// "name(Type1, Type2)" for diagnostics.
std::string signature_of(const MemberDecl& member);

} // namespace vwt::java
