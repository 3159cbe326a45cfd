#include "iclabel/matreader.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <numeric>

namespace iclabel::matreader {

namespace {

// MAT-file Level 5 data element types
enum MiType : std::uint32_t {
  miINT8 = 1,
  miUINT8 = 2,
  miINT16 = 3,
  miUINT16 = 4,
  miINT32 = 5,
  miUINT32 = 6,
  miSINGLE = 7,
  miDOUBLE = 9,
  miINT64 = 12,
  miUINT64 = 13,
  miMATRIX = 14,
  miCOMPRESSED = 15,
  miUTF8 = 16,
  miUTF16 = 17,
  miUTF32 = 18,
};

// Array classes
enum MxClass : std::uint32_t {
  mxCELL = 1,
  mxSTRUCT = 2,
  mxOBJECT = 3,
  mxCHAR = 4,
  mxSPARSE = 5,
  mxDOUBLE = 6,
  mxSINGLE = 7,
  mxINT8 = 8,
  mxUINT8 = 9,
  mxINT16 = 10,
  mxUINT16 = 11,
  mxINT32 = 12,
  mxUINT32 = 13,
  mxINT64 = 14,
  mxUINT64 = 15,
};

[[noreturn]] void fail(const char* kind, const std::string& msg) {
  throw error(kind, msg);
}

std::size_t mi_elem_size(std::uint32_t type) {
  switch (type) {
    case miINT8:
    case miUINT8:
    case miUTF8:
      return 1;
    case miINT16:
    case miUINT16:
    case miUTF16:
      return 2;
    case miINT32:
    case miUINT32:
    case miSINGLE:
    case miUTF32:
      return 4;
    case miINT64:
    case miUINT64:
    case miDOUBLE:
      return 8;
    default:
      fail("UnknownClass", "unknown data element type " + std::to_string(type));
  }
}

class Cursor {
public:
  Cursor(const std::uint8_t* data, std::size_t size, bool swap)
      : data_(data), size_(size), pos_(0), swap_(swap) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }
  bool swap() const { return swap_; }

  const std::uint8_t* take(std::size_t n) {
    if (n > remaining()) fail("Truncated", "stream ends inside an element");
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  void align8() {
    std::size_t rem = pos_ % 8;
    if (rem != 0) take(8 - rem);
  }

  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    if (swap_) v = __builtin_bswap32(v);
    return v;
  }

  std::uint16_t u16_at(std::size_t off) const {
    if (off + 2 > size_) fail("Truncated", "header too short");
    std::uint16_t v;
    std::memcpy(&v, data_ + off, 2);
    return v;
  }

private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_;
  bool swap_;
};

struct SubElement {
  std::uint32_t type;
  const std::uint8_t* data;
  std::size_t size;
};

// Reads one tagged subelement, honoring the 4-byte small-element format and
// 8-byte padding.
SubElement read_subelement(Cursor& c) {
  std::uint32_t first = c.u32();
  if ((first & 0xFFFF0000u) != 0) {
    // small element: size in the upper 16 bits, data in the next 4 bytes
    std::uint32_t size = first >> 16;
    std::uint32_t type = first & 0xFFFFu;
    if (size > 4) fail("BadStream", "small element larger than 4 bytes");
    const std::uint8_t* p = c.take(4);
    return {type, p, size};
  }
  std::uint32_t size = c.u32();
  const std::uint8_t* p = c.take(size);
  c.align8();
  return {first, p, size};
}

template <typename T>
T load_scalar(const std::uint8_t* p, bool swap) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if (swap) {
    if constexpr (sizeof(T) == 2) {
      std::uint16_t u;
      std::memcpy(&u, &v, 2);
      u = __builtin_bswap16(u);
      std::memcpy(&v, &u, 2);
    } else if constexpr (sizeof(T) == 4) {
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&v, &u, 4);
    } else if constexpr (sizeof(T) == 8) {
      std::uint64_t u;
      std::memcpy(&u, &v, 8);
      u = __builtin_bswap64(u);
      std::memcpy(&v, &u, 8);
    }
  }
  return v;
}

template <typename T>
void decode_into(const SubElement& e, bool swap, std::vector<double>& out) {
  std::size_t n = e.size / sizeof(T);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>(load_scalar<T>(e.data + i * sizeof(T), swap));
}

// Widen any numeric subelement payload to f64.
std::vector<double> decode_numeric(const SubElement& e, bool swap) {
  if (e.size % mi_elem_size(e.type) != 0)
    fail("BadStream", "data size not a multiple of the element size");
  std::vector<double> out;
  switch (e.type) {
    case miINT8:
      decode_into<std::int8_t>(e, swap, out);
      break;
    case miUINT8:
      decode_into<std::uint8_t>(e, swap, out);
      break;
    case miINT16:
      decode_into<std::int16_t>(e, swap, out);
      break;
    case miUINT16:
      decode_into<std::uint16_t>(e, swap, out);
      break;
    case miINT32:
      decode_into<std::int32_t>(e, swap, out);
      break;
    case miUINT32:
      decode_into<std::uint32_t>(e, swap, out);
      break;
    case miSINGLE:
      decode_into<float>(e, swap, out);
      break;
    case miDOUBLE:
      decode_into<double>(e, swap, out);
      break;
    default:
      fail("UnknownClass",
           "unexpected data type " + std::to_string(e.type) + " in numeric data");
  }
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_text(const SubElement& e, bool swap) {
  std::string out;
  switch (e.type) {
    case miUTF8:
      return std::string(reinterpret_cast<const char*>(e.data), e.size);
    case miINT8:
    case miUINT8:
      // byte text; values >= 0x80 treated as Latin-1
      for (std::size_t i = 0; i < e.size; ++i) append_utf8(out, e.data[i]);
      return out;
    case miUINT16:
    case miUTF16: {
      if (e.size % 2 != 0) fail("BadStream", "odd UTF-16 payload length");
      std::size_t n = e.size / 2;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t u = load_scalar<std::uint16_t>(e.data + 2 * i, swap);
        if (u >= 0xD800 && u < 0xDC00 && i + 1 < n) {
          std::uint32_t lo = load_scalar<std::uint16_t>(e.data + 2 * (i + 1), swap);
          if (lo >= 0xDC00 && lo < 0xE000) {
            u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
            ++i;
          }
        }
        append_utf8(out, u);
      }
      return out;
    }
    case miUTF32: {
      if (e.size % 4 != 0) fail("BadStream", "bad UTF-32 payload length");
      for (std::size_t i = 0; i < e.size / 4; ++i)
        append_utf8(out, load_scalar<std::uint32_t>(e.data + 4 * i, swap));
      return out;
    }
    default:
      fail("BadStream", "unsupported text encoding " + std::to_string(e.type));
  }
}

NumericKind class_to_kind(std::uint32_t cls) {
  switch (cls) {
    case mxDOUBLE:
      return NumericKind::f64;
    case mxSINGLE:
      return NumericKind::f32;
    case mxINT8:
      return NumericKind::i8;
    case mxUINT8:
      return NumericKind::u8;
    case mxINT16:
      return NumericKind::i16;
    case mxUINT16:
      return NumericKind::u16;
    case mxINT32:
      return NumericKind::i32;
    case mxUINT32:
      return NumericKind::u32;
    default:
      fail("UnknownClass", "unsupported numeric class " + std::to_string(cls));
  }
}

struct ParsedMatrix {
  std::string name;
  MatValuePtr value;
};

ParsedMatrix parse_matrix(const std::uint8_t* data, std::size_t size, bool swap);

// Parses the body of one miMATRIX element (after its outer tag).
ParsedMatrix parse_matrix_body(Cursor& c) {
  SubElement flags_e = read_subelement(c);
  if (flags_e.type != miUINT32 || flags_e.size < 8)
    fail("BadStream", "bad array flags subelement");
  std::uint32_t flags = load_scalar<std::uint32_t>(flags_e.data, c.swap());
  std::uint32_t cls = flags & 0xFF;
  bool complex_flag = (flags & 0x0800) != 0;
  bool logical_flag = (flags & 0x0200) != 0;

  if (cls == mxSPARSE) fail("UnknownClass", "sparse arrays are not supported");
  if (cls == mxOBJECT) fail("UnknownClass", "object arrays are not supported");
  if (complex_flag) fail("UnknownClass", "complex arrays are not supported");

  SubElement dims_e = read_subelement(c);
  if (dims_e.type != miINT32) fail("BadStream", "bad dimensions subelement");
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < dims_e.size / 4; ++i) {
    std::int32_t d = load_scalar<std::int32_t>(dims_e.data + 4 * i, c.swap());
    if (d < 0) fail("BadStream", "negative dimension");
    dims.push_back(static_cast<std::size_t>(d));
  }
  std::size_t count =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (dims.empty()) count = 0;
  if (count > (std::size_t{1} << 31)) fail("BadStream", "implausible element count");

  SubElement name_e = read_subelement(c);
  std::string name(reinterpret_cast<const char*>(name_e.data), name_e.size);

  ParsedMatrix out;
  out.name = name;

  if (count == 0) {
    out.value = std::make_shared<MatValue>(MatValue{Empty{}});
    return out;
  }

  switch (cls) {
    case mxCHAR: {
      SubElement data_e = read_subelement(c);
      CharArray ca;
      ca.dims = dims;
      ca.text = decode_text(data_e, c.swap());
      out.value = std::make_shared<MatValue>(MatValue{std::move(ca)});
      return out;
    }
    case mxCELL: {
      // each element needs at least an 8-byte tag
      if (count > c.remaining() / 8 + 1)
        fail("Truncated", "cell count exceeds remaining stream");
      CellArray cells;
      cells.dims = dims;
      cells.elements.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        SubElement e = read_subelement(c);
        if (e.type != miMATRIX) fail("BadStream", "cell element is not a matrix");
        if (e.size == 0) {
          cells.elements.push_back(std::make_shared<MatValue>(MatValue{Empty{}}));
        } else {
          cells.elements.push_back(parse_matrix(e.data, e.size, c.swap()).value);
        }
      }
      out.value = std::make_shared<MatValue>(MatValue{std::move(cells)});
      return out;
    }
    case mxSTRUCT: {
      SubElement len_e = read_subelement(c);
      if (len_e.type != miINT32 || len_e.size < 4)
        fail("BadStream", "bad struct field name length");
      std::int32_t name_len = load_scalar<std::int32_t>(len_e.data, c.swap());
      if (name_len <= 0) fail("BadStream", "bad struct field name length");

      SubElement names_e = read_subelement(c);
      if (names_e.size % static_cast<std::size_t>(name_len) != 0)
        fail("BadStream", "bad struct field names size");
      std::size_t n_fields = names_e.size / static_cast<std::size_t>(name_len);

      StructArray sa;
      sa.dims = dims;
      for (std::size_t f = 0; f < n_fields; ++f) {
        const char* p = reinterpret_cast<const char*>(names_e.data) + f * name_len;
        std::size_t len = strnlen(p, static_cast<std::size_t>(name_len));
        std::string fname(p, len);
        if (std::find(sa.field_names.begin(), sa.field_names.end(), fname) !=
            sa.field_names.end())
          fail("BadStream", "duplicate struct field name '" + fname + "'");
        sa.field_names.push_back(std::move(fname));
      }
      if (n_fields > 0 && count > c.remaining() / (8 * n_fields) + 1)
        fail("Truncated", "struct count exceeds remaining stream");
      sa.fields.reserve(count * n_fields);
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t f = 0; f < n_fields; ++f) {
          SubElement e = read_subelement(c);
          if (e.type != miMATRIX) fail("BadStream", "struct field is not a matrix");
          if (e.size == 0) {
            sa.fields.push_back(std::make_shared<MatValue>(MatValue{Empty{}}));
          } else {
            sa.fields.push_back(parse_matrix(e.data, e.size, c.swap()).value);
          }
        }
      }
      out.value = std::make_shared<MatValue>(MatValue{std::move(sa)});
      return out;
    }
    default: {
      NumericKind kind = class_to_kind(cls);
      (void)logical_flag;  // logical arrays decode as their stored integers
      SubElement data_e = read_subelement(c);
      NumericArray na;
      na.kind = kind;
      na.dims = dims;
      na.data = decode_numeric(data_e, c.swap());
      if (na.data.size() != count)
        fail("BadStream", "element count does not match dimensions");
      out.value = std::make_shared<MatValue>(MatValue{std::move(na)});
      return out;
    }
  }
}

ParsedMatrix parse_matrix(const std::uint8_t* data, std::size_t size, bool swap) {
  Cursor c(data, size, swap);
  return parse_matrix_body(c);
}

std::vector<std::uint8_t> inflate_element(const std::uint8_t* data, std::size_t size) {
  std::vector<std::uint8_t> out;
  out.resize(std::max<std::size_t>(size * 4, 4096));
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) fail("BadStream", "zlib init failed");
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(size);
  std::size_t written = 0;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    if (written == out.size()) {
      if (out.size() >= (std::size_t{1} << 30)) {
        inflateEnd(&zs);
        fail("BadStream", "compressed element expands implausibly");
      }
      out.resize(out.size() * 2);
    }
    zs.next_out = out.data() + written;
    zs.avail_out = static_cast<uInt>(out.size() - written);
    rc = inflate(&zs, Z_NO_FLUSH);
    written = out.size() - zs.avail_out;
    if (rc == Z_STREAM_END) break;
    if (rc != Z_OK) {
      inflateEnd(&zs);
      fail("BadStream", "corrupt compressed element (zlib error " +
                            std::to_string(rc) + ")");
    }
    if (zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      fail("BadStream", "compressed element ends prematurely");
    }
  }
  inflateEnd(&zs);
  out.resize(written);
  return out;
}

}  // namespace

std::string to_string(NumericKind k) {
  switch (k) {
    case NumericKind::f64:
      return "f64";
    case NumericKind::f32:
      return "f32";
    case NumericKind::i8:
      return "i8";
    case NumericKind::u8:
      return "u8";
    case NumericKind::i16:
      return "i16";
    case NumericKind::u16:
      return "u16";
    case NumericKind::i32:
      return "i32";
    case NumericKind::u32:
      return "u32";
  }
  return "?";
}

std::size_t StructArray::element_count() const {
  return field_names.empty() ? 0 : fields.size() / field_names.size();
}

bool StructArray::has_field(const std::string& name) const {
  return std::find(field_names.begin(), field_names.end(), name) !=
         field_names.end();
}

const MatValue& StructArray::field(const std::string& name,
                                   std::size_t element) const {
  auto it = std::find(field_names.begin(), field_names.end(), name);
  if (it == field_names.end())
    throw error("NoSuchField", "no struct field '" + name + "'");
  if (element >= element_count())
    throw error("IndexOutOfRange", "struct element " + std::to_string(element));
  return *fields[element * field_names.size() +
                 static_cast<std::size_t>(it - field_names.begin())];
}

const NumericArray& MatValue::numeric() const {
  if (!is_numeric()) throw error("TypeMismatch", "value is not a numeric array");
  return std::get<NumericArray>(v);
}

const CharArray& MatValue::chars() const {
  if (!is_char()) throw error("TypeMismatch", "value is not a char array");
  return std::get<CharArray>(v);
}

const StructArray& MatValue::strct() const {
  if (!is_struct()) throw error("TypeMismatch", "value is not a struct array");
  return std::get<StructArray>(v);
}

const CellArray& MatValue::cell() const {
  if (!is_cell()) throw error("TypeMismatch", "value is not a cell array");
  return std::get<CellArray>(v);
}

double MatValue::as_scalar() const {
  const NumericArray& na = numeric();
  if (na.data.size() != 1)
    throw error("TypeMismatch", "expected a scalar, got " +
                                    std::to_string(na.data.size()) + " elements");
  return na.data[0];
}

Mat MatValue::as_matrix() const {
  const NumericArray& na = numeric();
  std::size_t rows = na.dims.empty() ? 0 : na.dims[0];
  std::size_t cols = rows == 0 ? 0 : na.data.size() / rows;
  Mat m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = na.data[i + rows * j];
  return m;
}

Vec MatValue::as_vector() const {
  const NumericArray& na = numeric();
  return Eigen::Map<const Vec>(na.data.data(),
                               static_cast<Index>(na.data.size()));
}

Tensor3 MatValue::as_tensor3() const {
  const NumericArray& na = numeric();
  if (na.dims.size() > 3)
    throw error("TypeMismatch", "array has more than 3 dimensions");
  Index d0 = na.dims.size() > 0 ? static_cast<Index>(na.dims[0]) : 0;
  Index d1 = na.dims.size() > 1 ? static_cast<Index>(na.dims[1]) : 1;
  Index d2 = na.dims.size() > 2 ? static_cast<Index>(na.dims[2]) : 1;
  Tensor3 t(d0, d1, d2);
  t.flat() = Eigen::Map<const Vec>(na.data.data(),
                                   static_cast<Index>(na.data.size()));
  return t;
}

std::string MatValue::as_text() const { return chars().text; }

const MatValue& MatFile::var(const std::string& name) const {
  auto it = variables.find(name);
  if (it == variables.end())
    throw error("NoSuchField", "no variable '" + name + "'");
  return *it->second;
}

MatFile parse_mat(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t hdf5_magic[8] = {0x89, 'H', 'D', 'F',
                                             '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), hdf5_magic, 8) == 0)
    throw error("UnsupportedVersion",
                "MAT-file v7.3 (HDF5) is not supported; re-save as v7 or v6");
  if (bytes.size() < 128) throw error("Truncated", "file shorter than the header");

  // endianness indicator at offset 126: "IM" little-endian, "MI" big-endian
  bool swap_needed;
  bool host_le = [] {
    std::uint16_t one = 1;
    std::uint8_t b;
    std::memcpy(&b, &one, 1);
    return b == 1;
  }();
  if (bytes[126] == 'I' && bytes[127] == 'M')
    swap_needed = !host_le;
  else if (bytes[126] == 'M' && bytes[127] == 'I')
    swap_needed = host_le;
  else
    throw error("BadStream", "bad endianness indicator");

  MatFile file;
  file.big_endian = (bytes[126] == 'M');

  std::uint16_t version;
  std::memcpy(&version, bytes.data() + 124, 2);
  if (swap_needed) version = __builtin_bswap16(version);
  file.version = version;
  if (version == 0x0200)
    throw error("UnsupportedVersion", "MAT-file v7.3 is not supported");
  if (version != 0x0100)
    throw error("UnsupportedVersion",
                "unrecognized MAT version tag " + std::to_string(version));

  std::size_t text_end = 116;
  while (text_end > 0 &&
         (bytes[text_end - 1] == 0 || bytes[text_end - 1] == ' '))
    --text_end;
  file.header_text.assign(reinterpret_cast<const char*>(bytes.data()), text_end);

  Cursor c(bytes.data(), bytes.size(), swap_needed);
  c.take(128);

  while (c.remaining() > 0) {
    if (c.remaining() < 8) throw error("Truncated", "trailing partial tag");
    std::uint32_t type = c.u32();
    std::uint32_t size;
    const std::uint8_t* payload;
    if ((type & 0xFFFF0000u) != 0) {
      size = type >> 16;
      type &= 0xFFFFu;
      if (size > 4) throw error("BadStream", "small element larger than 4 bytes");
      payload = c.take(4);
    } else {
      size = c.u32();
      payload = c.take(size);
      if (type != miCOMPRESSED) c.align8();
    }

    ParsedMatrix pm;
    if (type == miCOMPRESSED) {
      std::vector<std::uint8_t> raw = inflate_element(payload, size);
      Cursor ic(raw.data(), raw.size(), swap_needed);
      SubElement inner = read_subelement(ic);
      if (inner.type != miMATRIX)
        throw error("BadStream", "compressed element does not hold a matrix");
      pm = parse_matrix(inner.data, inner.size, swap_needed);
    } else if (type == miMATRIX) {
      pm = parse_matrix(payload, size, swap_needed);
    } else {
      throw error("UnknownClass",
                  "unexpected top-level element type " + std::to_string(type));
    }

    if (pm.name.empty()) throw error("BadStream", "unnamed top-level variable");
    if (file.has(pm.name))
      throw error("BadStream", "duplicate variable '" + pm.name + "'");
    file.order.push_back(pm.name);
    file.variables.emplace(pm.name, pm.value);
  }
  return file;
}

Mat read_fdt(const std::vector<std::uint8_t>& bytes, std::size_t n_channels,
             std::size_t n_samples_total) {
  std::size_t expected = 4 * n_channels * n_samples_total;
  if (bytes.size() != expected)
    throw error("SizeMismatch",
                "fdt payload is " + std::to_string(bytes.size()) +
                    " bytes, expected " + std::to_string(expected));
  Mat m(static_cast<Index>(n_channels), static_cast<Index>(n_samples_total));
  const std::uint8_t* p = bytes.data();
  for (std::size_t s = 0; s < n_samples_total; ++s) {
    for (std::size_t ch = 0; ch < n_channels; ++ch) {
      std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                        (static_cast<std::uint32_t>(p[1]) << 8) |
                        (static_cast<std::uint32_t>(p[2]) << 16) |
                        (static_cast<std::uint32_t>(p[3]) << 24);
      float f;
      std::memcpy(&f, &u, 4);
      m(static_cast<Index>(ch), static_cast<Index>(s)) = static_cast<double>(f);
      p += 4;
    }
  }
  return m;
}

MatValuePtr get_path(const MatFile& file, const std::vector<PathElem>& path) {
  if (path.empty()) throw error("NoSuchField", "empty path");
  const std::string* first = std::get_if<std::string>(&path[0]);
  if (!first) throw error("TypeMismatch", "path must start with a variable name");

  MatValuePtr cur;
  std::size_t start = 1;
  if (file.has(*first)) {
    cur = file.variables.at(*first);
  } else if (file.variables.size() == 1 &&
             file.variables.begin()->second->is_struct()) {
    // flat access into a single top-level struct
    cur = file.variables.begin()->second;
    start = 0;
  } else {
    throw error("NoSuchField", "no variable '" + *first + "'");
  }

  for (std::size_t i = start; i < path.size(); ++i) {
    if (const std::string* name = std::get_if<std::string>(&path[i])) {
      const StructArray& sa = cur->strct();
      auto it = std::find(sa.field_names.begin(), sa.field_names.end(), *name);
      if (it == sa.field_names.end())
        throw error("NoSuchField", "no struct field '" + *name + "'");
      if (sa.element_count() == 0)
        throw error("IndexOutOfRange", "empty struct array");
      cur = sa.fields[static_cast<std::size_t>(it - sa.field_names.begin())];
    } else {
      std::size_t idx = std::get<std::size_t>(path[i]);
      if (cur->is_cell()) {
        const CellArray& ca = cur->cell();
        if (idx >= ca.elements.size())
          throw error("IndexOutOfRange",
                      "cell index " + std::to_string(idx) + " out of range");
        cur = ca.elements[idx];
      } else if (cur->is_struct()) {
        const StructArray& sa = cur->strct();
        if (idx >= sa.element_count())
          throw error("IndexOutOfRange",
                      "struct index " + std::to_string(idx) + " out of range");
        auto one = std::make_shared<MatValue>();
        StructArray sel;
        sel.dims = {1, 1};
        sel.field_names = sa.field_names;
        for (std::size_t f = 0; f < sa.field_names.size(); ++f)
          sel.fields.push_back(sa.fields[idx * sa.field_names.size() + f]);
        one->v = std::move(sel);
        cur = one;
      } else {
        throw error("TypeMismatch", "cannot index into a leaf value");
      }
    }
  }
  return cur;
}

}  // namespace iclabel::matreader
