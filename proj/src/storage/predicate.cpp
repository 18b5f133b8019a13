#include "archivist/storage/predicate.hpp"

#include <algorithm>

#include "archivist/error.hpp"

namespace archivist::storage {

std::string fold_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    });
    return out;
}

void Predicate::check(EntityKind kind) const {
    const auto& fields = schema(kind).fields;
    for (const auto& clause : clauses) {
        if (std::find(fields.begin(), fields.end(), clause.field) == fields.end()) {
            throw Error(ErrorCode::UnknownField,
                        "unknown field '" + clause.field + "' for " +
                            std::string(kind_name(kind)),
                        clause.field);
        }
    }
}

bool Predicate::matches(const nlohmann::json& record) const {
    for (const auto& clause : clauses) {
        auto it = record.find(clause.field);
        if (it == record.end()) return false;
        if (clause.op == Op::IsNull) {
            if (!it->is_null()) return false;
            continue;
        }
        if (it->is_null()) return false;
        const std::string text = it->is_string() ? it->get<std::string>() : it->dump();
        switch (clause.op) {
            case Op::Equals:
                if (text != clause.value) return false;
                break;
            case Op::EqualsFolded:
                if (fold_ascii(text) != fold_ascii(clause.value)) return false;
                break;
            case Op::Contains:
                if (fold_ascii(text).find(fold_ascii(clause.value)) == std::string::npos) {
                    return false;
                }
                break;
            case Op::IsNull:
                break;
        }
    }
    return true;
}

}  // namespace archivist::storage
