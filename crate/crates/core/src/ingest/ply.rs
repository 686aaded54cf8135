//! Reader and writer for the subset of PLY used by meshes and labeled point
//! clouds: `ascii 1.0` and `binary_little_endian 1.0`, scalar and list
//! properties of the standard numeric types.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            other => return Err(Error::parse(format!("unknown PLY type {other:?}"))),
        })
    }

    fn name(self) -> &'static str {
        match self {
            ScalarType::I8 => "char",
            ScalarType::U8 => "uchar",
            ScalarType::I16 => "short",
            ScalarType::U16 => "ushort",
            ScalarType::I32 => "int",
            ScalarType::U32 => "uint",
            ScalarType::F32 => "float",
            ScalarType::F64 => "double",
        }
    }

    pub fn is_integer(self) -> bool {
        !matches!(self, ScalarType::F32 | ScalarType::F64)
    }

    /// Encoded width in bytes.
    pub fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Int(i64),
    Float(f64),
}

impl Scalar {
    pub fn as_f64(self) -> f64 {
        match self {
            Scalar::Int(i) => i as f64,
            Scalar::Float(f) => f,
        }
    }

    pub fn as_int(self) -> Result<i64> {
        match self {
            Scalar::Int(i) => Ok(i),
            Scalar::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
            Scalar::Float(f) => Err(Error::parse(format!("expected integer, got {f}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(Scalar),
    List(Vec<Scalar>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyKind {
    Scalar(ScalarType),
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDef {
    pub name: String,
    pub kind: PropertyKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub properties: Vec<PropertyDef>,
    pub rows: Vec<Vec<Value>>,
}

impl Element {
    pub fn property_index(&self, name: &str) -> Option<usize> {
        self.properties.iter().position(|p| p.name == name)
    }

    /// Scalar column by name.
    pub fn scalars(&self, name: &str) -> Result<Option<Vec<Scalar>>> {
        let Some(idx) = self.property_index(name) else {
            return Ok(None);
        };
        self.rows
            .iter()
            .map(|row| match &row[idx] {
                Value::Scalar(s) => Ok(*s),
                Value::List(_) => Err(Error::parse(format!(
                    "property {name:?} of element {:?} is a list",
                    self.name
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlyData {
    pub format: PlyFormat,
    pub elements: Vec<Element>,
}

impl PlyData {
    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }
}

struct Header {
    format: PlyFormat,
    elements: Vec<(String, usize, Vec<PropertyDef>)>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::parse("missing end_header"))?;
    let mut body_offset = end + END.len();
    if bytes.get(body_offset) == Some(&b'\r') {
        body_offset += 1;
    }
    if bytes.get(body_offset) == Some(&b'\n') {
        body_offset += 1;
    }
    let text =
        std::str::from_utf8(&bytes[..end]).map_err(|_| Error::parse("header is not UTF-8"))?;
    let mut lines = text.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(Error::parse("missing 'ply' magic"));
    }

    let mut format = None;
    let mut elements: Vec<(String, usize, Vec<PropertyDef>)> = Vec::new();
    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, version] => {
                if *version != "1.0" {
                    return Err(Error::parse(format!("unsupported PLY version {version}")));
                }
                format = Some(match *fmt {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => return Err(Error::parse(format!("unsupported PLY format {other}"))),
                });
            }
            ["element", name, count] => {
                let count = count
                    .parse::<usize>()
                    .map_err(|_| Error::parse(format!("bad element count {count:?}")))?;
                elements.push((name.to_string(), count, Vec::new()));
            }
            ["property", "list", count, item, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse("property before element"))?;
                let count = ScalarType::parse(count)?;
                if !count.is_integer() {
                    return Err(Error::parse("list count type must be an integer"));
                }
                el.2.push(PropertyDef {
                    name: name.to_string(),
                    kind: PropertyKind::List {
                        count,
                        item: ScalarType::parse(item)?,
                    },
                });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse("property before element"))?;
                el.2.push(PropertyDef {
                    name: name.to_string(),
                    kind: PropertyKind::Scalar(ScalarType::parse(ty)?),
                });
            }
            _ => return Err(Error::parse(format!("bad header line {line:?}"))),
        }
    }
    Ok(Header {
        format: format.ok_or_else(|| Error::parse("missing format line"))?,
        elements,
        body_offset,
    })
}

trait BodyReader {
    fn scalar(&mut self, ty: ScalarType) -> Result<Scalar>;
    fn finish(&mut self) -> Result<()>;
}

struct AsciiReader<'a> {
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl BodyReader for AsciiReader<'_> {
    fn scalar(&mut self, ty: ScalarType) -> Result<Scalar> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| Error::parse("unexpected end of data"))?;
        if ty.is_integer() {
            tok.parse::<i64>()
                .map(Scalar::Int)
                .map_err(|_| Error::parse(format!("bad integer {tok:?}")))
        } else {
            tok.parse::<f64>()
                .map(Scalar::Float)
                .map_err(|_| Error::parse(format!("bad float {tok:?}")))
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.tokens.next() {
            None => Ok(()),
            Some(tok) => Err(Error::parse(format!("trailing data starting at {tok:?}"))),
        }
    }
}

struct BinaryReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BinaryReader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::parse("unexpected end of data"))?;
        self.pos = end;
        Ok(slice.try_into().expect("slice length"))
    }
}

impl BodyReader for BinaryReader<'_> {
    fn scalar(&mut self, ty: ScalarType) -> Result<Scalar> {
        Ok(match ty {
            ScalarType::I8 => Scalar::Int(i8::from_le_bytes(self.take()?) as i64),
            ScalarType::U8 => Scalar::Int(u8::from_le_bytes(self.take()?) as i64),
            ScalarType::I16 => Scalar::Int(i16::from_le_bytes(self.take()?) as i64),
            ScalarType::U16 => Scalar::Int(u16::from_le_bytes(self.take()?) as i64),
            ScalarType::I32 => Scalar::Int(i32::from_le_bytes(self.take()?) as i64),
            ScalarType::U32 => Scalar::Int(u32::from_le_bytes(self.take()?) as i64),
            ScalarType::F32 => Scalar::Float(f32::from_le_bytes(self.take()?) as f64),
            ScalarType::F64 => Scalar::Float(f64::from_le_bytes(self.take()?)),
        })
    }

    fn finish(&mut self) -> Result<()> {
        // Some exporters pad the tail; only a short body is an error.
        Ok(())
    }
}

fn read_body(header: Header, reader: &mut dyn BodyReader) -> Result<PlyData> {
    let mut elements = Vec::with_capacity(header.elements.len());
    for (name, count, properties) in header.elements {
        let mut rows = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            let mut row = Vec::with_capacity(properties.len());
            for prop in &properties {
                match prop.kind {
                    PropertyKind::Scalar(ty) => row.push(Value::Scalar(reader.scalar(ty)?)),
                    PropertyKind::List { count, item } => {
                        let n = reader.scalar(count)?.as_int()?;
                        if n < 0 {
                            return Err(Error::parse("negative list length"));
                        }
                        let items = (0..n)
                            .map(|_| reader.scalar(item))
                            .collect::<Result<Vec<_>>>()?;
                        row.push(Value::List(items));
                    }
                }
            }
            rows.push(row);
        }
        elements.push(Element {
            name,
            properties,
            rows,
        });
    }
    reader.finish()?;
    Ok(PlyData {
        format: header.format,
        elements,
    })
}

pub fn parse_ply(bytes: &[u8]) -> Result<PlyData> {
    let header = parse_header(bytes)?;
    let body = &bytes[header.body_offset..];
    match header.format {
        PlyFormat::Ascii => {
            let text =
                std::str::from_utf8(body).map_err(|_| Error::parse("ASCII body is not UTF-8"))?;
            let mut reader = AsciiReader {
                tokens: text.split_ascii_whitespace(),
            };
            read_body(header, &mut reader)
        }
        PlyFormat::BinaryLittleEndian => {
            let mut reader = BinaryReader {
                bytes: body,
                pos: 0,
            };
            read_body(header, &mut reader)
        }
    }
}

fn write_scalar(out: &mut Vec<u8>, format: PlyFormat, ty: ScalarType, v: Scalar) -> Result<()> {
    match format {
        PlyFormat::Ascii => {
            match v {
                Scalar::Int(i) => write!(out, "{i}")?,
                // `{}` on f64 prints the shortest string that parses back exactly.
                Scalar::Float(f) if ty == ScalarType::F32 => write!(out, "{}", f as f32)?,
                Scalar::Float(f) => write!(out, "{f}")?,
            }
            Ok(())
        }
        PlyFormat::BinaryLittleEndian => {
            let i = || v.as_int();
            match ty {
                ScalarType::I8 => out.extend_from_slice(&(i()? as i8).to_le_bytes()),
                ScalarType::U8 => out.extend_from_slice(&(i()? as u8).to_le_bytes()),
                ScalarType::I16 => out.extend_from_slice(&(i()? as i16).to_le_bytes()),
                ScalarType::U16 => out.extend_from_slice(&(i()? as u16).to_le_bytes()),
                ScalarType::I32 => out.extend_from_slice(&(i()? as i32).to_le_bytes()),
                ScalarType::U32 => out.extend_from_slice(&(i()? as u32).to_le_bytes()),
                ScalarType::F32 => out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes()),
                ScalarType::F64 => out.extend_from_slice(&v.as_f64().to_le_bytes()),
            }
            Ok(())
        }
    }
}

/// Serializes `data` in `data.format`. Every row must match its element's
/// property list.
pub fn write_ply(data: &PlyData) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let format_name = match data.format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    writeln!(out, "ply\nformat {format_name} 1.0")?;
    for el in &data.elements {
        writeln!(out, "element {} {}", el.name, el.rows.len())?;
        for p in &el.properties {
            match p.kind {
                PropertyKind::Scalar(ty) => writeln!(out, "property {} {}", ty.name(), p.name)?,
                PropertyKind::List { count, item } => writeln!(
                    out,
                    "property list {} {} {}",
                    count.name(),
                    item.name(),
                    p.name
                )?,
            }
        }
    }
    writeln!(out, "end_header")?;

    let ascii = data.format == PlyFormat::Ascii;
    for el in &data.elements {
        for row in &el.rows {
            if row.len() != el.properties.len() {
                return Err(Error::validation(format!(
                    "row width mismatch in element {}",
                    el.name
                )));
            }
            let mut first = true;
            let mut sep = |out: &mut Vec<u8>| {
                if ascii && !first {
                    out.push(b' ');
                }
                first = false;
            };
            for (prop, value) in el.properties.iter().zip(row) {
                match (&prop.kind, value) {
                    (PropertyKind::Scalar(ty), Value::Scalar(v)) => {
                        sep(&mut out);
                        write_scalar(&mut out, data.format, *ty, *v)?;
                    }
                    (PropertyKind::List { count, item }, Value::List(items)) => {
                        sep(&mut out);
                        write_scalar(
                            &mut out,
                            data.format,
                            *count,
                            Scalar::Int(items.len() as i64),
                        )?;
                        for v in items {
                            sep(&mut out);
                            write_scalar(&mut out, data.format, *item, *v)?;
                        }
                    }
                    _ => {
                        return Err(Error::validation(format!(
                            "value kind mismatch for property {}",
                            prop.name
                        )))
                    }
                }
            }
            if ascii {
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}
