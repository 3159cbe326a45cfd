#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "iclabel/types.hpp"

namespace iclabel::matreader {

// Element kind of a numeric array as stored in the file. Values are widened
// to f64 on access; the original kind is kept for fidelity.
enum class NumericKind { f64, f32, i8, u8, i16, u16, i32, u32 };

std::string to_string(NumericKind k);

struct MatValue;
using MatValuePtr = std::shared_ptr<const MatValue>;

struct NumericArray {
  NumericKind kind = NumericKind::f64;
  std::vector<std::size_t> dims;
  std::vector<double> data;  // column-major
};

struct CharArray {
  std::vector<std::size_t> dims;
  std::string text;  // decoded to UTF-8
};

struct StructArray {
  std::vector<std::size_t> dims;
  std::vector<std::string> field_names;
  // fields[element * field_names.size() + field], element index column-major
  std::vector<MatValuePtr> fields;

  std::size_t element_count() const;
  // field of element 0; throws NoSuchField
  const MatValue& field(const std::string& name, std::size_t element = 0) const;
  bool has_field(const std::string& name) const;
};

struct CellArray {
  std::vector<std::size_t> dims;
  std::vector<MatValuePtr> elements;  // column-major
};

struct Empty {};

struct MatValue {
  std::variant<NumericArray, CharArray, StructArray, CellArray, Empty> v;

  bool is_numeric() const { return std::holds_alternative<NumericArray>(v); }
  bool is_char() const { return std::holds_alternative<CharArray>(v); }
  bool is_struct() const { return std::holds_alternative<StructArray>(v); }
  bool is_cell() const { return std::holds_alternative<CellArray>(v); }
  bool is_empty() const { return std::holds_alternative<Empty>(v); }

  const NumericArray& numeric() const;
  const CharArray& chars() const;
  const StructArray& strct() const;
  const CellArray& cell() const;

  // Widening accessors; throw TypeMismatch on the wrong variant.
  double as_scalar() const;
  Mat as_matrix() const;          // dims collapsed to 2-D (rows = dim 0)
  Vec as_vector() const;          // flattened column-major
  Tensor3 as_tensor3() const;     // 2-D inputs get trailing extent 1
  std::string as_text() const;
};

struct MatFile {
  std::string header_text;          // 116-byte description, trimmed
  std::uint16_t version = 0;
  bool big_endian = false;
  std::vector<std::string> order;   // top-level names in file order
  std::map<std::string, MatValuePtr> variables;

  bool has(const std::string& name) const { return variables.count(name) != 0; }
  const MatValue& var(const std::string& name) const;
};

// Path element for get_path: struct field by name, cell/struct element by index.
using PathElem = std::variant<std::string, std::size_t>;

// Parse a complete MAT-file Level 5 byte stream.
// Errors: UnsupportedVersion, Truncated, UnknownClass, BadStream.
MatFile parse_mat(const std::vector<std::uint8_t>& bytes);

// Decode a raw .fdt float payload: little-endian f32, channel-fastest layout.
// Errors: SizeMismatch.
Mat read_fdt(const std::vector<std::uint8_t>& bytes, std::size_t n_channels,
             std::size_t n_samples_total);

// Walk a nested value. Errors: NoSuchField, IndexOutOfRange, TypeMismatch.
// Indexing a struct array yields the addressed 1x1 element.
MatValuePtr get_path(const MatFile& file, const std::vector<PathElem>& path);

}  // namespace iclabel::matreader
