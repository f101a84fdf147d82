//! Vertex extraction from binary glTF 2.0 (GLB) containers.
//!
//! Only what point extraction needs is read: the JSON chunk, a single
//! embedded BIN chunk, and the `POSITION` / `COLOR_0` accessors of every mesh
//! primitive. Positions are binary32 in glTF and are widened to binary64.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{Dataset, Dims, PointRecord};
use crate::error::{Error, Result};
use crate::fractal::{colorize, Palette};

const GLB_MAGIC: u32 = 0x4654_6C67; // "glTF"
const CHUNK_JSON: u32 = 0x4E4F_534A;
const CHUNK_BIN: u32 = 0x004E_4942;

const COMPONENT_U8: u32 = 5121;
const COMPONENT_U16: u32 = 5123;
const COMPONENT_F32: u32 = 5126;

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Document {
    #[serde(default)]
    meshes: Vec<Mesh>,
    #[serde(default)]
    accessors: Vec<Accessor>,
    #[serde(default)]
    buffer_views: Vec<BufferView>,
    #[serde(default)]
    buffers: Vec<Buffer>,
}

#[derive(Deserialize)]
struct Mesh {
    #[serde(default)]
    primitives: Vec<Primitive>,
}

#[derive(Deserialize)]
struct Primitive {
    #[serde(default)]
    attributes: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Accessor {
    buffer_view: Option<usize>,
    #[serde(default)]
    byte_offset: usize,
    component_type: u32,
    count: usize,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    normalized: bool,
    sparse: Option<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct BufferView {
    buffer: usize,
    #[serde(default)]
    byte_offset: usize,
    byte_length: usize,
    byte_stride: Option<usize>,
}

#[derive(Deserialize)]
struct Buffer {
    uri: Option<String>,
}

struct Container {
    json: Vec<u8>,
    bin: Option<Vec<u8>>,
}

fn corrupt(message: impl Into<String>) -> Error {
    Error::parse(0, message)
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| corrupt(format!("truncated container at byte {at}")))
}

fn parse_container(bytes: &[u8]) -> Result<Container> {
    if read_u32(bytes, 0)? != GLB_MAGIC {
        return Err(corrupt("not a GLB container (bad magic)"));
    }
    let version = read_u32(bytes, 4)?;
    if version != 2 {
        return Err(corrupt(format!(
            "unsupported glTF container version {version}"
        )));
    }
    let total = read_u32(bytes, 8)? as usize;
    if total > bytes.len() || total < 12 {
        return Err(corrupt(format!(
            "declared length {total} but {} bytes available",
            bytes.len()
        )));
    }
    let bytes = &bytes[..total];

    let mut chunks = Vec::new();
    let mut at = 12;
    while at < total {
        let len = read_u32(bytes, at)? as usize;
        let kind = read_u32(bytes, at + 4)?;
        let start = at + 8;
        let data = bytes
            .get(start..start + len)
            .ok_or_else(|| corrupt(format!("chunk at byte {at} overruns the container")))?;
        chunks.push((kind, data.to_vec()));
        at = start + len;
    }
    let mut chunks = chunks.into_iter();
    let json = match chunks.next() {
        Some((CHUNK_JSON, data)) => data,
        _ => return Err(corrupt("first chunk must be JSON")),
    };
    let bin = match chunks.next() {
        Some((CHUNK_BIN, data)) => Some(data),
        Some((kind, _)) => return Err(corrupt(format!("unexpected chunk type {kind:#x}"))),
        None => None,
    };
    if chunks.next().is_some() {
        return Err(Error::Schema("only one binary chunk is supported".into()));
    }
    Ok(Container { json, bin })
}

/// Reads every `POSITION` triple of every mesh primitive, in mesh and then
/// primitive order. Colors come from `COLOR_0` where present; other points
/// get the default palette.
pub fn extract_points_from_glb<R: Read>(mut source: R) -> Result<Dataset> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    extract_from_bytes(&bytes, "glb", "glb stream")
}

pub fn extract_points_from_glb_file(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "glb".into());
    extract_from_bytes(&bytes, &name, &path.display().to_string())
}

fn extract_from_bytes(bytes: &[u8], name: &str, source: &str) -> Result<Dataset> {
    let container = parse_container(bytes)?;
    let doc: Document = serde_json::from_slice(&container.json)
        .map_err(|e| corrupt(format!("invalid glTF JSON: {e}")))?;
    let bin = container.bin.as_deref().unwrap_or(&[]);
    if doc.buffers.iter().any(|b| b.uri.is_some()) {
        return Err(Error::Schema("external buffers are not supported".into()));
    }
    if doc.meshes.iter().all(|m| m.primitives.is_empty()) {
        return Err(Error::Schema("container has no mesh primitives".into()));
    }

    let mut points = Vec::new();
    let mut colors: Vec<Option<[f64; 3]>> = Vec::new();
    for (m, mesh) in doc.meshes.iter().enumerate() {
        for (p, prim) in mesh.primitives.iter().enumerate() {
            let where_ = format!("mesh {m} primitive {p}");
            let pos_index = *prim
                .attributes
                .get("POSITION")
                .ok_or_else(|| Error::Schema(format!("{where_} has no POSITION accessor")))?;
            let positions = read_accessor(&doc, bin, pos_index, &where_)?;
            if positions.width != 3 || positions.component != COMPONENT_F32 {
                return Err(Error::Schema(format!(
                    "{where_}: POSITION must be float VEC3"
                )));
            }
            let prim_colors = match prim.attributes.get("COLOR_0") {
                Some(&idx) => {
                    let c = read_accessor(&doc, bin, idx, &where_)?;
                    if c.count() != positions.count() || !(3..=4).contains(&c.width) {
                        return Err(Error::Schema(format!(
                            "{where_}: COLOR_0 must be VEC3/VEC4 with one entry per vertex"
                        )));
                    }
                    Some(c)
                }
                None => None,
            };
            for i in 0..positions.count() {
                let v = positions.element(i);
                points.push(PointRecord::new_3d(v[0], v[1], v[2], [0.0; 3]));
                colors.push(prim_colors.as_ref().map(|c| {
                    let e = c.element(i);
                    [
                        e[0].clamp(0.0, 1.0),
                        e[1].clamp(0.0, 1.0),
                        e[2].clamp(0.0, 1.0),
                    ]
                }));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Schema(
            "POSITION accessors contain no vertices".into(),
        ));
    }

    let mut dataset = Dataset::new(name, source, Dims::Three, points);
    if colors.iter().any(Option::is_none) {
        dataset = colorize(&dataset, &Palette::default())?;
    }
    for (point, color) in dataset.points.iter_mut().zip(colors) {
        if let Some(c) = color {
            point.color = c;
        }
    }
    Ok(dataset)
}

/// Decoded accessor contents, widened to f64 and normalized where flagged.
struct AccessorData {
    width: usize,
    component: u32,
    values: Vec<f64>,
}

impl AccessorData {
    fn count(&self) -> usize {
        self.values.len() / self.width
    }

    fn element(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }
}

fn read_accessor(doc: &Document, bin: &[u8], index: usize, where_: &str) -> Result<AccessorData> {
    let acc = doc
        .accessors
        .get(index)
        .ok_or_else(|| Error::Schema(format!("{where_}: accessor {index} does not exist")))?;
    if acc.sparse.is_some() {
        return Err(Error::Schema(format!(
            "{where_}: sparse accessors are not supported"
        )));
    }
    let width = match acc.kind.as_str() {
        "SCALAR" => 1,
        "VEC2" => 2,
        "VEC3" => 3,
        "VEC4" => 4,
        other => return Err(Error::Schema(format!("{where_}: accessor type {other}"))),
    };
    let component_size = match acc.component_type {
        COMPONENT_U8 => 1,
        COMPONENT_U16 => 2,
        COMPONENT_F32 => 4,
        other => {
            return Err(Error::Schema(format!("{where_}: component type {other}")));
        }
    };
    if acc.component_type != COMPONENT_F32 && !acc.normalized {
        return Err(Error::Schema(format!(
            "{where_}: integer components must be normalized"
        )));
    }
    let view_index = acc
        .buffer_view
        .ok_or_else(|| Error::Schema(format!("{where_}: accessor without buffer view")))?;
    let view = doc
        .buffer_views
        .get(view_index)
        .ok_or_else(|| Error::Schema(format!("{where_}: buffer view {view_index} missing")))?;
    if view.buffer != 0 {
        return Err(Error::Schema(format!(
            "{where_}: buffer {} is not embedded",
            view.buffer
        )));
    }
    let elem = width * component_size;
    let stride = view.byte_stride.unwrap_or(elem);
    if stride < elem {
        return Err(corrupt(format!(
            "{where_}: byte stride {stride} < element size {elem}"
        )));
    }
    let view_bytes = view
        .byte_offset
        .checked_add(view.byte_length)
        .and_then(|end| bin.get(view.byte_offset..end))
        .ok_or_else(|| corrupt(format!("{where_}: buffer view overruns the binary chunk")))?;
    if acc.count > 0 {
        let needed = acc.byte_offset + (acc.count - 1) * stride + elem;
        if needed > view_bytes.len() {
            return Err(corrupt(format!(
                "{where_}: accessor overruns its buffer view"
            )));
        }
    }

    let mut values = Vec::with_capacity(acc.count * width);
    for i in 0..acc.count {
        let base = acc.byte_offset + i * stride;
        for c in 0..width {
            let at = base + c * component_size;
            let b = &view_bytes[at..at + component_size];
            let v = match acc.component_type {
                COMPONENT_F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
                COMPONENT_U16 => u16::from_le_bytes([b[0], b[1]]) as f64 / 65535.0,
                _ => b[0] as f64 / 255.0,
            };
            if !v.is_finite() {
                return Err(corrupt(format!("{where_}: non-finite component")));
            }
            values.push(v);
        }
    }
    Ok(AccessorData {
        width,
        component: acc.component_type,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn glb(json: &str, bin: &[u8]) -> Vec<u8> {
        let mut j = json.as_bytes().to_vec();
        while j.len() % 4 != 0 {
            j.push(b' ');
        }
        let mut b = bin.to_vec();
        while b.len() % 4 != 0 {
            b.push(0);
        }
        let total = 12 + 8 + j.len() + if b.is_empty() { 0 } else { 8 + b.len() };
        let mut out = Vec::new();
        out.extend(GLB_MAGIC.to_le_bytes());
        out.extend(2u32.to_le_bytes());
        out.extend((total as u32).to_le_bytes());
        out.extend((j.len() as u32).to_le_bytes());
        out.extend(CHUNK_JSON.to_le_bytes());
        out.extend(j);
        if !b.is_empty() {
            out.extend((b.len() as u32).to_le_bytes());
            out.extend(CHUNK_BIN.to_le_bytes());
            out.extend(b);
        }
        out
    }

    fn f32_bytes(v: &[f32]) -> Vec<u8> {
        v.iter().flat_map(|x| x.to_le_bytes()).collect()
    }

    const TRI: [f32; 9] = [0.1, 0.2, 0.3, -1.5, 2.25, 1e-3, 7.0, -0.0, 1e6];

    fn triangle_json(extra_attr: &str, extra: &str) -> String {
        format!(
            r#"{{"asset":{{"version":"2.0"}},"buffers":[{{"byteLength":36}}],
            "bufferViews":[{{"buffer":0,"byteLength":36}}{extra}],
            "accessors":[{{"bufferView":0,"componentType":5126,"count":3,"type":"VEC3"}}
            {}],
            "meshes":[{{"primitives":[{{"attributes":{{"POSITION":0{extra_attr}}}}}]}}]}}"#,
            if extra.is_empty() {
                ""
            } else {
                r#",{"bufferView":1,"componentType":5121,"normalized":true,"count":3,"type":"VEC4"}"#
            }
        )
    }

    #[test]
    fn widened_positions() {
        let bytes = glb(&triangle_json("", ""), &f32_bytes(&TRI));
        let d = extract_points_from_glb(bytes.as_slice()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.dims, Dims::Three);
        for (i, p) in d.points.iter().enumerate() {
            for k in 0..3 {
                assert_eq!(p.coords[k].to_bits(), (TRI[i * 3 + k] as f64).to_bits());
            }
            assert!(p.color.iter().all(|c| (0.0..=1.0).contains(c)));
        }
    }

    #[test]
    fn normalized_byte_colors() {
        let mut bin = f32_bytes(&TRI);
        bin.extend([255, 0, 128, 255, 0, 255, 0, 255, 51, 102, 204, 255]);
        let json = triangle_json(
            r#","COLOR_0":1"#,
            r#",{"buffer":0,"byteOffset":36,"byteLength":12}"#,
        );
        let d = extract_points_from_glb(glb(&json, &bin).as_slice()).unwrap();
        assert_eq!(d.points[0].color, [1.0, 0.0, 128.0 / 255.0]);
        assert_eq!(d.points[2].color, [0.2, 0.4, 0.8]);
    }

    #[test]
    fn no_meshes_is_schema_error() {
        let bytes = glb(r#"{"asset":{"version":"2.0"}}"#, &[]);
        assert!(matches!(
            extract_points_from_glb(bytes.as_slice()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn missing_position_is_schema_error() {
        let json = r#"{"meshes":[{"primitives":[{"attributes":{"NORMAL":0}}]}]}"#;
        assert!(matches!(
            extract_points_from_glb(glb(json, &[]).as_slice()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn corrupt_containers_are_parse_errors() {
        let good = glb(&triangle_json("", ""), &f32_bytes(&TRI));
        assert!(matches!(
            extract_points_from_glb(&b"x,y,r,g,b\n"[..]),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            extract_points_from_glb(&good[..good.len() - 8]),
            Err(Error::Parse { .. })
        ));
        let mut bad_json = good.clone();
        bad_json[20] = b'!';
        assert!(matches!(
            extract_points_from_glb(bad_json.as_slice()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn accessor_overrun_detected() {
        let json = triangle_json("", "").replace("\"count\":3", "\"count\":4");
        let bytes = glb(&json, &f32_bytes(&TRI));
        assert!(matches!(
            extract_points_from_glb(bytes.as_slice()),
            Err(Error::Parse { .. })
        ));
    }
}
