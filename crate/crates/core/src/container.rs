//! Binary container for noise map stacks and classifiers.
//!
//! Layout, all integers little-endian `u64` unless noted:
//!
//! ```text
//! magic  b"DFAC"        4 bytes
//! version u32           currently 1
//! kind   u8             1 = noise map stack, 2 = classifier
//! height width channels
//! steps                 T, 0 for classifiers
//! schedule hash         0 for classifiers
//! body                  kind-specific, reals as little-endian f64
//! ```
//!
//! A stack body holds the condition (`class + 1` or 0 for null, then the
//! guidance scale), `x_T`, the `T` noise maps and the `T + 1` auxiliary
//! states. A classifier body holds the kind, class count, optional training
//! accuracy and every dense layer.

use std::fs;
use std::path::Path;

use crate::chain::NoiseMapStack;
use crate::classifier::{Activation, Classifier, ClassifierKind, Dense};
use crate::denoiser::Condition;
use crate::error::{Error, Result};
use crate::sample::{Sample, Shape};

const MAGIC: &[u8; 4] = b"DFAC";
const VERSION: u32 = 1;
const KIND_STACK: u8 = 1;
const KIND_CLASSIFIER: u8 = 2;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn header(kind: u8, shape: Shape, steps: usize, hash: u64) -> Self {
        let mut w = Self::default();
        w.0.extend_from_slice(MAGIC);
        w.0.extend_from_slice(&VERSION.to_le_bytes());
        w.0.push(kind);
        for v in [shape.height, shape.width, shape.channels, steps] {
            w.u64(v as u64);
        }
        w.u64(hash);
        w
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn reals(&mut self, vs: &[f64]) {
        vs.iter().for_each(|&v| self.f64(v));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

struct Header {
    kind: u8,
    shape: Shape,
    steps: usize,
    hash: u64,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Container(format!("truncated at byte {} (wanted {n} more)", self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Container(format!("count {v} too large")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Container("length overflow".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn sample(&mut self, shape: Shape) -> Result<Sample> {
        Sample::new(shape, self.reals(shape.len())?)
    }

    fn header(bytes: &'a [u8], want: u8) -> Result<(Self, Header)> {
        let mut r = Self { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Container("bad magic".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Container(format!("unsupported version {version}")));
        }
        let kind = r.take(1)?[0];
        if kind != want {
            return Err(Error::Container(format!("expected kind {want}, found {kind}")));
        }
        let (h, w, c) = (r.usize()?, r.usize()?, r.usize()?);
        let shape = Shape::new(h, w, c).map_err(|_| Error::Container(format!("bad shape {h}x{w}x{c}")))?;
        let steps = r.usize()?;
        let hash = r.u64()?;
        Ok((r, Header { kind, shape, steps, hash }))
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Container(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn encode_stack(stack: &NoiseMapStack) -> Vec<u8> {
    let shape = stack.x_top.shape();
    let mut w = Writer::header(KIND_STACK, shape, stack.steps(), stack.schedule_hash);
    w.u64(stack.cond.class.map_or(0, |c| c as u64 + 1));
    w.f64(stack.cond.guidance_scale);
    w.reals(stack.x_top.as_slice());
    for s in stack.z.iter().chain(&stack.aux_x) {
        w.reals(s.as_slice());
    }
    w.0
}

pub fn decode_stack(bytes: &[u8]) -> Result<NoiseMapStack> {
    let (mut r, h) = Reader::header(bytes, KIND_STACK)?;
    debug_assert_eq!(h.kind, KIND_STACK);
    let class = match r.usize()? {
        0 => None,
        c => Some(c - 1),
    };
    let cond = Condition { class, guidance_scale: r.f64()? };
    let x_top = r.sample(h.shape)?;
    let z = (0..h.steps).map(|_| r.sample(h.shape)).collect::<Result<Vec<_>>>()?;
    let aux_x = (0..=h.steps).map(|_| r.sample(h.shape)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(NoiseMapStack { x_top, z, aux_x, schedule_hash: h.hash, cond })
}

pub fn encode_classifier(clf: &Classifier) -> Vec<u8> {
    let mut w = Writer::header(KIND_CLASSIFIER, clf.input_shape(), 0, 0);
    match clf.kind() {
        ClassifierKind::SoftmaxLinear => {
            w.u64(0);
            w.u64(0);
            w.u64(0);
        }
        ClassifierKind::Mlp1Hidden { hidden, activation } => {
            w.u64(1);
            w.u64(hidden as u64);
            w.u64(match activation {
                Activation::Tanh => 0,
                Activation::Relu => 1,
            });
        }
    }
    w.u64(clf.classes() as u64);
    w.f64(clf.train_accuracy().unwrap_or(f64::NAN));
    w.u64(clf.layers().len() as u64);
    for layer in clf.layers() {
        w.u64(layer.inputs as u64);
        w.u64(layer.outputs as u64);
        w.reals(&layer.weights);
        w.reals(&layer.bias);
    }
    w.0
}

pub fn decode_classifier(bytes: &[u8]) -> Result<Classifier> {
    let (mut r, h) = Reader::header(bytes, KIND_CLASSIFIER)?;
    if h.steps != 0 || h.hash != 0 {
        return Err(Error::Container("classifier header carries schedule fields".into()));
    }
    let kind = match (r.u64()?, r.usize()?, r.u64()?) {
        (0, _, _) => ClassifierKind::SoftmaxLinear,
        (1, hidden, act) => ClassifierKind::Mlp1Hidden {
            hidden,
            activation: match act {
                0 => Activation::Tanh,
                1 => Activation::Relu,
                a => return Err(Error::Container(format!("unknown activation {a}"))),
            },
        },
        (k, _, _) => return Err(Error::Container(format!("unknown classifier kind {k}"))),
    };
    let classes = r.usize()?;
    let acc = r.f64()?;
    let count = r.usize()?;
    if count > 2 {
        return Err(Error::Container(format!("{count} layers")));
    }
    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let (inputs, outputs) = (r.usize()?, r.usize()?);
        let n = inputs
            .checked_mul(outputs)
            .ok_or_else(|| Error::Container("layer size overflow".into()))?;
        let weights = r.reals(n)?;
        let bias = r.reals(outputs)?;
        layers.push(Dense { inputs, outputs, weights, bias });
    }
    r.finish()?;
    let mut clf = Classifier::from_layers(kind, h.shape, classes, layers)?;
    clf.set_train_accuracy((!acc.is_nan()).then_some(acc));
    Ok(clf)
}

pub fn save_stack(stack: &NoiseMapStack, path: &Path) -> Result<()> {
    Ok(fs::write(path, encode_stack(stack))?)
}

pub fn load_stack(path: &Path) -> Result<NoiseMapStack> {
    decode_stack(&fs::read(path)?)
}

pub fn save_classifier(clf: &Classifier, path: &Path) -> Result<()> {
    Ok(fs::write(path, encode_classifier(clf))?)
}

pub fn load_classifier(path: &Path) -> Result<Classifier> {
    decode_classifier(&fs::read(path)?)
}
