//! Checkpoint format.
//!
//! Magic bytes `OLCK`, little-endian `u32` version (= 1), a `u32` layer
//! count, a layer-spec table, then every weight array as little-endian
//! `f32` in declaration order.
//!
//! Layer encodings:
//!
//! ```text
//! 0x00 conv    kh u32, kw u32, cin u32, cout u32, padding u8 (0 valid / 1 same)
//! 0x01 relu
//! 0x02 maxpool window u32, stride u32
//! 0x03 dense   in u32, out u32
//! 0x04 tansig
//! 0x05 softmax
//! ```
//!
//! Weight payload: for each conv layer its kernel then bias; for each
//! dense layer its matrix then bias. Other layers carry no parameters.

use super::{Cnn3lModel, ConvLayer, MlpModel, MLP_HIDDEN};
use crate::nn::{LayerSpec, Padding, TensorBuffer};
use crate::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"OLCK";
const VERSION: u32 = 1;

enum LayerEntry {
    Conv {
        kh: u32,
        kw: u32,
        cin: u32,
        cout: u32,
        same: bool,
    },
    Relu,
    MaxPool {
        window: u32,
        stride: u32,
    },
    Dense {
        in_dim: u32,
        out_dim: u32,
    },
    Tansig,
    Softmax,
}

fn write_u32(out: &mut impl Write, v: u32) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_layer(out: &mut impl Write, layer: &LayerEntry) -> Result<()> {
    match layer {
        LayerEntry::Conv { kh, kw, cin, cout, same } => {
            out.write_all(&[0x00])?;
            write_u32(out, *kh)?;
            write_u32(out, *kw)?;
            write_u32(out, *cin)?;
            write_u32(out, *cout)?;
            out.write_all(&[u8::from(*same)])?;
        }
        LayerEntry::Relu => out.write_all(&[0x01])?,
        LayerEntry::MaxPool { window, stride } => {
            out.write_all(&[0x02])?;
            write_u32(out, *window)?;
            write_u32(out, *stride)?;
        }
        LayerEntry::Dense { in_dim, out_dim } => {
            out.write_all(&[0x03])?;
            write_u32(out, *in_dim)?;
            write_u32(out, *out_dim)?;
        }
        LayerEntry::Tansig => out.write_all(&[0x04])?,
        LayerEntry::Softmax => out.write_all(&[0x05])?,
    }
    Ok(())
}

fn write_tensor(out: &mut impl Write, t: &TensorBuffer) -> Result<()> {
    for v in t.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    Ok(u32::from_le_bytes(word))
}

fn read_u8(input: &mut impl Read) -> Result<u8> {
    let mut byte = [0u8; 1];
    input.read_exact(&mut byte)?;
    Ok(byte[0])
}

fn read_tensor(input: &mut impl Read, shape: &[usize]) -> Result<TensorBuffer> {
    let len: usize = shape.iter().product();
    let mut data = vec![0.0f32; len];
    let mut word = [0u8; 4];
    for v in &mut data {
        input.read_exact(&mut word)?;
        *v = f32::from_le_bytes(word);
    }
    TensorBuffer::from_vec(shape, data)
}

fn read_layer(input: &mut impl Read) -> Result<LayerEntry> {
    Ok(match read_u8(input)? {
        0x00 => LayerEntry::Conv {
            kh: read_u32(input)?,
            kw: read_u32(input)?,
            cin: read_u32(input)?,
            cout: read_u32(input)?,
            same: read_u8(input)? != 0,
        },
        0x01 => LayerEntry::Relu,
        0x02 => LayerEntry::MaxPool {
            window: read_u32(input)?,
            stride: read_u32(input)?,
        },
        0x03 => LayerEntry::Dense {
            in_dim: read_u32(input)?,
            out_dim: read_u32(input)?,
        },
        0x04 => LayerEntry::Tansig,
        0x05 => LayerEntry::Softmax,
        other => {
            return Err(Error::Parse {
                line: 0,
                message: format!("unknown layer kind 0x{other:02x}"),
            })
        }
    })
}

fn open_checkpoint(path: &Path) -> Result<(std::io::BufReader<std::fs::File>, u32)> {
    let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse {
            line: 0,
            message: format!("bad checkpoint magic {magic:?}"),
        });
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Parse {
            line: 0,
            message: format!("unsupported checkpoint version {version}"),
        });
    }
    let n_layers = read_u32(&mut input)?;
    Ok((input, n_layers))
}

/// Save a backbone checkpoint.
pub fn save_cnn_checkpoint(path: &Path, model: &Cnn3lModel) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MAGIC)?;
    write_u32(&mut out, VERSION)?;
    let n_layers = model.convs.len() * 2 + 3; // conv+relu pairs, pool, dense, softmax
    write_u32(&mut out, n_layers as u32)?;
    for conv in &model.convs {
        let (kh, kw, cin, cout, same) = match conv.spec {
            LayerSpec::Conv {
                kernel_h,
                kernel_w,
                in_channels,
                out_channels,
                padding,
            } => (
                kernel_h as u32,
                kernel_w as u32,
                in_channels as u32,
                out_channels as u32,
                padding == Padding::Same,
            ),
            _ => unreachable!("conv layers hold conv specs"),
        };
        write_layer(&mut out, &LayerEntry::Conv { kh, kw, cin, cout, same })?;
        write_layer(&mut out, &LayerEntry::Relu)?;
    }
    write_layer(
        &mut out,
        &LayerEntry::MaxPool {
            window: model.pool_window as u32,
            stride: model.pool_stride as u32,
        },
    )?;
    write_layer(
        &mut out,
        &LayerEntry::Dense {
            in_dim: model.feature_len as u32,
            out_dim: 4,
        },
    )?;
    write_layer(&mut out, &LayerEntry::Softmax)?;
    for conv in &model.convs {
        write_tensor(&mut out, &conv.weights)?;
        write_tensor(&mut out, &conv.bias)?;
    }
    write_tensor(&mut out, &model.dense_weights)?;
    write_tensor(&mut out, &model.dense_bias)?;
    out.flush()?;
    Ok(())
}

/// Load a backbone checkpoint saved by [`save_cnn_checkpoint`].
pub fn load_cnn_checkpoint(path: &Path) -> Result<Cnn3lModel> {
    let (mut input, n_layers) = open_checkpoint(path)?;
    let mut layers = Vec::with_capacity(n_layers as usize);
    for _ in 0..n_layers {
        layers.push(read_layer(&mut input)?);
    }

    let bad = |message: String| Error::Parse { line: 0, message };
    let mut convs_spec = Vec::new();
    let mut idx = 0usize;
    while idx < layers.len() {
        match &layers[idx] {
            LayerEntry::Conv { kh, kw, cin, cout, same } => {
                if !matches!(layers.get(idx + 1), Some(LayerEntry::Relu)) {
                    return Err(bad("conv layer not followed by relu".into()));
                }
                convs_spec.push((*kh as usize, *kw as usize, *cin as usize, *cout as usize, *same));
                idx += 2;
            }
            _ => break,
        }
    }
    let (pool_window, pool_stride) = match layers.get(idx) {
        Some(LayerEntry::MaxPool { window, stride }) => (*window as usize, *stride as usize),
        _ => return Err(bad("expected maxpool after the conv stack".into())),
    };
    let (dense_in, dense_out) = match layers.get(idx + 1) {
        Some(LayerEntry::Dense { in_dim, out_dim }) => (*in_dim as usize, *out_dim as usize),
        _ => return Err(bad("expected dense after maxpool".into())),
    };
    if !matches!(layers.get(idx + 2), Some(LayerEntry::Softmax)) {
        return Err(bad("expected softmax head".into()));
    }
    if dense_out != 4 {
        return Err(bad(format!("expected a 4-class head, got {dense_out}")));
    }

    let mut convs = Vec::with_capacity(convs_spec.len());
    let mut side = crate::segment::PATCH_SIZE;
    for &(kh, kw, cin, cout, same) in &convs_spec {
        if !same {
            side = side
                .checked_sub(kh - 1)
                .ok_or_else(|| bad("kernel larger than activation".into()))?;
        }
        let weights = read_tensor(&mut input, &[kh, kw, cin, cout])?;
        let bias = read_tensor(&mut input, &[cout])?;
        convs.push(ConvLayer {
            spec: LayerSpec::Conv {
                kernel_h: kh,
                kernel_w: kw,
                in_channels: cin,
                out_channels: cout,
                padding: if same { Padding::Same } else { Padding::Valid },
            },
            weights,
            bias,
        });
    }
    let dense_weights = read_tensor(&mut input, &[dense_in, dense_out])?;
    let dense_bias = read_tensor(&mut input, &[dense_out])?;

    let pooled_side = (side - pool_window) / pool_stride + 1;
    let last_channels = convs_spec.last().map(|&(_, _, _, cout, _)| cout).unwrap_or(3);
    let feature_len = pooled_side * pooled_side * last_channels;
    if feature_len != dense_in {
        return Err(bad(format!(
            "dense input {dense_in} inconsistent with pooled feature length {feature_len}"
        )));
    }
    Ok(Cnn3lModel {
        convs,
        pool_window,
        pool_stride,
        dense_weights,
        dense_bias,
        pre_pool_side: side,
        feature_len,
    })
}

/// Save an MLP-head checkpoint.
pub fn save_mlp_checkpoint(path: &Path, model: &MlpModel) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MAGIC)?;
    write_u32(&mut out, VERSION)?;
    write_u32(&mut out, 4)?;
    write_layer(
        &mut out,
        &LayerEntry::Dense {
            in_dim: model.w1.shape()[0] as u32,
            out_dim: model.w1.shape()[1] as u32,
        },
    )?;
    write_layer(&mut out, &LayerEntry::Tansig)?;
    write_layer(
        &mut out,
        &LayerEntry::Dense {
            in_dim: model.w2.shape()[0] as u32,
            out_dim: model.w2.shape()[1] as u32,
        },
    )?;
    write_layer(&mut out, &LayerEntry::Softmax)?;
    write_tensor(&mut out, &model.w1)?;
    write_tensor(&mut out, &model.b1)?;
    write_tensor(&mut out, &model.w2)?;
    write_tensor(&mut out, &model.b2)?;
    out.flush()?;
    Ok(())
}

/// Load an MLP checkpoint saved by [`save_mlp_checkpoint`].
pub fn load_mlp_checkpoint(path: &Path) -> Result<MlpModel> {
    let (mut input, n_layers) = open_checkpoint(path)?;
    if n_layers != 4 {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected 4 layers in an MLP checkpoint, got {n_layers}"),
        });
    }
    let bad = |message: String| Error::Parse { line: 0, message };
    let (in1, out1) = match read_layer(&mut input)? {
        LayerEntry::Dense { in_dim, out_dim } => (in_dim as usize, out_dim as usize),
        _ => return Err(bad("expected dense layer".into())),
    };
    if !matches!(read_layer(&mut input)?, LayerEntry::Tansig) {
        return Err(bad("expected tansig".into()));
    }
    let (in2, out2) = match read_layer(&mut input)? {
        LayerEntry::Dense { in_dim, out_dim } => (in_dim as usize, out_dim as usize),
        _ => return Err(bad("expected dense layer".into())),
    };
    if !matches!(read_layer(&mut input)?, LayerEntry::Softmax) {
        return Err(bad("expected softmax".into()));
    }
    if out1 != MLP_HIDDEN || in2 != MLP_HIDDEN || out2 != 4 {
        return Err(bad(format!(
            "unexpected MLP dimensions {in1}x{out1} -> {in2}x{out2}"
        )));
    }
    Ok(MlpModel {
        w1: read_tensor(&mut input, &[in1, out1])?,
        b1: read_tensor(&mut input, &[out1])?,
        w2: read_tensor(&mut input, &[in2, out2])?,
        b2: read_tensor(&mut input, &[out2])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnn_checkpoint_round_trips() {
        let model = Cnn3lModel::with_depth(2, 31).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cnn.olck");
        save_cnn_checkpoint(&path, &model).unwrap();
        let loaded = load_cnn_checkpoint(&path).unwrap();
        assert_eq!(model, loaded);

        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"OLCK");
    }

    #[test]
    fn canonical_cnn_checkpoint_round_trips() {
        let model = Cnn3lModel::new(5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cnn3l.olck");
        save_cnn_checkpoint(&path, &model).unwrap();
        let loaded = load_cnn_checkpoint(&path).unwrap();
        assert_eq!(model, loaded);
        assert_eq!(loaded.feature_len, 48_400);
    }

    #[test]
    fn mlp_checkpoint_round_trips() {
        let model = MlpModel::new(209, 8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mlp.olck");
        save_mlp_checkpoint(&path, &model).unwrap();
        let loaded = load_mlp_checkpoint(&path).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.olck");
        std::fs::write(&path, b"NOPE\x01\x00\x00\x00\x00\x00\x00\x00").unwrap();
        assert!(load_cnn_checkpoint(&path).is_err());
        assert!(load_mlp_checkpoint(&path).is_err());
    }
}
