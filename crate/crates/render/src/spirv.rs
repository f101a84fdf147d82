//! Minimal SPIR-V reflection: the entry point, its location-decorated inputs
//! and outputs, and the push-constant block size. Enough to check a module
//! against a [`PipelineVariant`] before any driver sees it.

use std::collections::HashMap;

use crate::error::{RenderError, Result};
use crate::variant::PipelineVariant;

pub const MAGIC: u32 = 0x0723_0203;
/// Newest SPIR-V version accepted, 1.6.
pub const MAX_VERSION: (u8, u8) = (1, 6);

const OP_NAME: u16 = 5;
const OP_ENTRY_POINT: u16 = 15;
const OP_CAPABILITY: u16 = 17;
const OP_TYPE_INT: u16 = 21;
const OP_TYPE_FLOAT: u16 = 22;
const OP_TYPE_VECTOR: u16 = 23;
const OP_TYPE_MATRIX: u16 = 24;
const OP_TYPE_ARRAY: u16 = 28;
const OP_TYPE_STRUCT: u16 = 30;
const OP_TYPE_POINTER: u16 = 32;
const OP_CONSTANT: u16 = 43;
const OP_VARIABLE: u16 = 59;
const OP_DECORATE: u16 = 71;
const OP_MEMBER_DECORATE: u16 = 72;

const DEC_MATRIX_STRIDE: u32 = 7;
const DEC_ARRAY_STRIDE: u32 = 6;
const DEC_BUILTIN: u32 = 11;
const DEC_FLAT: u32 = 14;
const DEC_LOCATION: u32 = 30;
const DEC_OFFSET: u32 = 35;

const SC_INPUT: u32 = 1;
const SC_OUTPUT: u32 = 3;
const SC_PUSH_CONSTANT: u32 = 9;

/// `Float64` capability.
pub const CAPABILITY_FLOAT64: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecutionModel {
    Vertex,
    Fragment,
    Other(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarKind {
    Float,
    Int,
}

/// Scalar or vector type of an interface variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IoType {
    pub kind: ScalarKind,
    pub bits: u32,
    pub components: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterfaceVariable {
    pub name: Option<String>,
    pub location: u32,
    pub ty: IoType,
    pub flat: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShaderInterface {
    pub version: (u8, u8),
    pub stage: ExecutionModel,
    pub entry_point: String,
    /// Sorted by location; built-ins are left out.
    pub inputs: Vec<InterfaceVariable>,
    pub outputs: Vec<InterfaceVariable>,
    pub push_constant_size: Option<u32>,
    pub capabilities: Vec<u32>,
}

#[derive(Clone, Debug)]
enum Type {
    Int(u32),
    Float(u32),
    Vector(u32, u32),
    Matrix(u32, u32),
    Array(u32, u32),
    Struct(Vec<u32>),
    Pointer(u32),
}

fn string_at(words: &[u32]) -> String {
    let mut bytes = Vec::new();
    'outer: for w in words {
        for b in w.to_le_bytes() {
            if b == 0 {
                break 'outer;
            }
            bytes.push(b);
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Words occupied by a nul-terminated literal string.
fn string_words(words: &[u32]) -> usize {
    words
        .iter()
        .position(|w| w.to_le_bytes().contains(&0))
        .map_or(words.len(), |p| p + 1)
}

type Decorations = Vec<(u32, Option<u32>)>;

struct Module {
    types: HashMap<u32, Type>,
    constants: HashMap<u32, u32>,
    names: HashMap<u32, String>,
    decorations: HashMap<u32, Decorations>,
    member_decorations: HashMap<(u32, u32), Decorations>,
    variables: Vec<(u32, u32, u32)>,
}

impl Module {
    fn decoration(&self, id: u32, d: u32) -> Option<Option<u32>> {
        self.decorations
            .get(&id)?
            .iter()
            .find(|(k, _)| *k == d)
            .map(|(_, v)| *v)
    }

    fn member_decoration(&self, s: u32, m: u32, d: u32) -> Option<Option<u32>> {
        self.member_decorations
            .get(&(s, m))?
            .iter()
            .find(|(k, _)| *k == d)
            .map(|(_, v)| *v)
    }

    fn io_type(&self, id: u32) -> Option<IoType> {
        match self.types.get(&id)? {
            Type::Float(bits) => Some(IoType {
                kind: ScalarKind::Float,
                bits: *bits,
                components: 1,
            }),
            Type::Int(bits) => Some(IoType {
                kind: ScalarKind::Int,
                bits: *bits,
                components: 1,
            }),
            Type::Vector(c, n) => {
                let s = self.io_type(*c)?;
                Some(IoType {
                    components: *n,
                    ..s
                })
            }
            _ => None,
        }
    }

    fn size_of(&self, id: u32, matrix_stride: Option<u32>) -> Option<u32> {
        match self.types.get(&id)? {
            Type::Int(bits) | Type::Float(bits) => Some(bits / 8),
            Type::Vector(c, n) => Some(self.size_of(*c, None)? * n),
            Type::Matrix(col, n) => match matrix_stride {
                Some(stride) => Some(stride * n),
                None => Some(self.size_of(*col, None)? * n),
            },
            Type::Array(elem, len) => {
                let n = *self.constants.get(len)?;
                let stride = match self.decoration(id, DEC_ARRAY_STRIDE) {
                    Some(Some(s)) => s,
                    _ => self.size_of(*elem, None)?,
                };
                Some(stride * n)
            }
            Type::Struct(members) => {
                let mut end = 0;
                for (m, &ty) in members.iter().enumerate() {
                    let m = m as u32;
                    let offset = match self.member_decoration(id, m, DEC_OFFSET) {
                        Some(Some(o)) => o,
                        _ => end,
                    };
                    let stride = self.member_decoration(id, m, DEC_MATRIX_STRIDE).flatten();
                    end = end.max(offset + self.size_of(ty, stride)?);
                }
                Some(end)
            }
            Type::Pointer(..) => None,
        }
    }

    fn is_builtin(&self, var: u32, pointee: u32) -> bool {
        if self.decoration(var, DEC_BUILTIN).is_some() {
            return true;
        }
        match self.types.get(&pointee) {
            Some(Type::Struct(members)) => (0..members.len() as u32)
                .any(|m| self.member_decoration(pointee, m, DEC_BUILTIN).is_some()),
            _ => false,
        }
    }
}

/// Reflects the first entry point of a SPIR-V binary. `module` names the
/// binary in errors.
pub fn reflect(module: &str, bytes: &[u8]) -> Result<ShaderInterface> {
    let err = |m: String| RenderError::shader(module, m);
    if bytes.len() % 4 != 0 || bytes.len() < 20 {
        return Err(err(format!(
            "{} bytes is not a whole SPIR-V module",
            bytes.len()
        )));
    }
    let words: Vec<u32> = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if words[0] != MAGIC {
        return Err(err(format!("bad magic number {:#010x}", words[0])));
    }
    let version = (
        ((words[1] >> 16) & 0xff) as u8,
        ((words[1] >> 8) & 0xff) as u8,
    );
    if version > MAX_VERSION || version < (1, 0) {
        return Err(err(format!(
            "SPIR-V version {}.{} is not supported",
            version.0, version.1
        )));
    }

    let mut m = Module {
        types: HashMap::new(),
        constants: HashMap::new(),
        names: HashMap::new(),
        decorations: HashMap::new(),
        member_decorations: HashMap::new(),
        variables: Vec::new(),
    };
    let mut entry: Option<(u32, String, Vec<u32>)> = None;
    let mut capabilities = Vec::new();
    let mut at = 5;
    while at < words.len() {
        let count = (words[at] >> 16) as usize;
        let op = (words[at] & 0xffff) as u16;
        if count == 0 || at + count > words.len() {
            return Err(err(format!("truncated instruction at word {at}")));
        }
        let w = &words[at + 1..at + count];
        let need = |n: usize| {
            if w.len() < n {
                Err(err(format!(
                    "opcode {op} at word {at} has {} operands, needs {n}",
                    w.len()
                )))
            } else {
                Ok(())
            }
        };
        match op {
            OP_NAME => {
                need(1)?;
                m.names.insert(w[0], string_at(&w[1..]));
            }
            OP_ENTRY_POINT if entry.is_none() => {
                need(3)?;
                let name = string_at(&w[2..]);
                let rest = 2 + string_words(&w[2..]);
                entry = Some((w[0], name, w.get(rest..).unwrap_or(&[]).to_vec()));
            }
            OP_CAPABILITY => {
                need(1)?;
                capabilities.push(w[0]);
            }
            OP_TYPE_INT => {
                need(2)?;
                m.types.insert(w[0], Type::Int(w[1]));
            }
            OP_TYPE_FLOAT => {
                need(2)?;
                m.types.insert(w[0], Type::Float(w[1]));
            }
            OP_TYPE_VECTOR => {
                need(3)?;
                m.types.insert(w[0], Type::Vector(w[1], w[2]));
            }
            OP_TYPE_MATRIX => {
                need(3)?;
                m.types.insert(w[0], Type::Matrix(w[1], w[2]));
            }
            OP_TYPE_ARRAY => {
                need(3)?;
                m.types.insert(w[0], Type::Array(w[1], w[2]));
            }
            OP_TYPE_STRUCT => {
                need(1)?;
                m.types.insert(w[0], Type::Struct(w[1..].to_vec()));
            }
            OP_TYPE_POINTER => {
                need(3)?;
                m.types.insert(w[0], Type::Pointer(w[2]));
            }
            OP_CONSTANT => {
                need(3)?;
                m.constants.insert(w[1], w[2]);
            }
            OP_VARIABLE => {
                need(3)?;
                m.variables.push((w[0], w[1], w[2]));
            }
            OP_DECORATE => {
                need(2)?;
                m.decorations
                    .entry(w[0])
                    .or_default()
                    .push((w[1], w.get(2).copied()));
            }
            OP_MEMBER_DECORATE => {
                need(3)?;
                m.member_decorations
                    .entry((w[0], w[1]))
                    .or_default()
                    .push((w[2], w.get(3).copied()));
            }
            _ => {}
        }
        at += count;
    }

    let (model, entry_point, interface) = entry.ok_or_else(|| err("no OpEntryPoint".into()))?;
    let stage = match model {
        0 => ExecutionModel::Vertex,
        4 => ExecutionModel::Fragment,
        other => ExecutionModel::Other(other),
    };
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut push_constant_size = None;
    for &(ptr, id, class) in &m.variables {
        if !interface.contains(&id) && class != SC_PUSH_CONSTANT {
            continue;
        }
        let Some(Type::Pointer(pointee)) = m.types.get(&ptr) else {
            return Err(err(format!("variable %{id} is not typed by a pointer")));
        };
        match class {
            SC_INPUT | SC_OUTPUT => {
                if m.is_builtin(id, *pointee) {
                    continue;
                }
                let Some(Some(location)) = m.decoration(id, DEC_LOCATION) else {
                    return Err(err(format!("interface variable %{id} has no Location")));
                };
                let ty = m.io_type(*pointee).ok_or_else(|| {
                    err(format!(
                        "interface variable %{id} is not a scalar or vector"
                    ))
                })?;
                let v = InterfaceVariable {
                    name: m.names.get(&id).cloned(),
                    location,
                    ty,
                    flat: m.decoration(id, DEC_FLAT).is_some(),
                };
                if class == SC_INPUT {
                    inputs.push(v);
                } else {
                    outputs.push(v);
                }
            }
            SC_PUSH_CONSTANT => {
                let size = m
                    .size_of(*pointee, None)
                    .ok_or_else(|| err("push-constant block has an unsized member".into()))?;
                push_constant_size = Some(push_constant_size.unwrap_or(0).max(size));
            }
            _ => {}
        }
    }
    inputs.sort_by_key(|v| v.location);
    outputs.sort_by_key(|v| v.location);
    Ok(ShaderInterface {
        version,
        stage,
        entry_point,
        inputs,
        outputs,
        push_constant_size,
        capabilities,
    })
}

impl ShaderInterface {
    pub fn uses_float64(&self) -> bool {
        self.capabilities.contains(&CAPABILITY_FLOAT64)
    }
}

fn describe(t: IoType) -> String {
    let base = match (t.kind, t.bits) {
        (ScalarKind::Float, 32) => "float".to_string(),
        (ScalarKind::Float, 64) => "double".to_string(),
        (k, b) => format!("{k:?}{b}"),
    };
    if t.components == 1 {
        base
    } else {
        format!("{base}{}", t.components)
    }
}

/// Checks a vertex module's inputs and push constants against `variant`.
pub fn check_vertex_interface(
    module: &str,
    vs: &ShaderInterface,
    variant: &PipelineVariant,
) -> Result<()> {
    let err = |m: String| Err(RenderError::shader(module, m));
    if vs.stage != ExecutionModel::Vertex {
        return err(format!(
            "expected a vertex entry point, found {:?}",
            vs.stage
        ));
    }
    if vs.inputs.len() != variant.vertex_layout.len() {
        return err(format!(
            "{} vertex inputs, the {} layout has {} attributes",
            vs.inputs.len(),
            variant.label(),
            variant.vertex_layout.len()
        ));
    }
    for (input, attr) in vs.inputs.iter().zip(&variant.vertex_layout) {
        let want = IoType {
            kind: ScalarKind::Float,
            bits: attr.format.component_bits(),
            components: attr.format.components(),
        };
        if input.location != attr.location || input.ty != want {
            return err(format!(
                "input at location {} is {}, the layout puts {} ({}) there",
                input.location,
                describe(input.ty),
                attr.name,
                describe(want),
            ));
        }
    }
    match vs.push_constant_size {
        Some(n) if n == variant.push_constant_size => Ok(()),
        other => err(format!(
            "push constants are {other:?} bytes, the {} variant sends {}",
            variant.label(),
            variant.push_constant_size
        )),
    }
}

/// Vertex outputs must match fragment inputs location for location, and
/// 64-bit values crossing the stages must be flat on both sides.
pub fn check_stage_link(vs: &ShaderInterface, fs: &ShaderInterface) -> Result<()> {
    for input in &fs.inputs {
        let Some(out) = vs.outputs.iter().find(|o| o.location == input.location) else {
            return Err(RenderError::shader(
                "link",
                format!(
                    "fragment input at location {} has no vertex output",
                    input.location
                ),
            ));
        };
        if out.ty != input.ty {
            return Err(RenderError::shader(
                "link",
                format!(
                    "location {}: vertex writes {}, fragment reads {}",
                    input.location,
                    describe(out.ty),
                    describe(input.ty)
                ),
            ));
        }
        if input.ty.bits == 64 && !(out.flat && input.flat) {
            return Err(RenderError::shader(
                "link",
                format!("64-bit varying at location {} must be flat", input.location),
            ));
        }
    }
    Ok(())
}
