//! Counter-based random streams.
//!
//! Every draw is a pure function of `(seed, stream, counter)` through the
//! Philox4x32-10 block function, so a value can be regenerated without
//! replaying the draws before it, and replicates can run in any order.
//! Gaussians come from the inverse normal CDF of a single uniform, which keeps
//! one counter per variate on every platform.

use alloc::borrow::Cow;
use alloc::string::String;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// The Philox4x32 bijection with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// A named, indexed random stream, e.g. `J` for replicate 17.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stream {
    label: Cow<'static, str>,
    index: u64,
}

impl Stream {
    pub fn new(label: impl Into<Cow<'static, str>>) -> Self {
        Self { label: label.into(), index: 0 }
    }

    pub fn with_index(mut self, index: u64) -> Self {
        self.index = index;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// 64-bit identifier placed in the upper half of the Philox counter.
    pub fn id(&self) -> u64 {
        splitmix64(fnv1a(self.label.as_bytes()) ^ splitmix64(self.index))
    }

    pub fn describe(&self) -> String {
        alloc::format!("{}#{}", self.label, self.index)
    }
}

/// Random access into one `(seed, stream)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterStream {
    key: [u32; 2],
    stream: u64,
}

impl CounterStream {
    pub fn new(seed: u64, stream: &Stream) -> Self {
        Self { key: [seed as u32, (seed >> 32) as u32], stream: stream.id() }
    }

    /// The 128-bit block at `counter`, as two 64-bit words.
    pub fn block(&self, counter: u64) -> [u64; 2] {
        let out = philox4x32_10(
            [counter as u32, (counter >> 32) as u32, self.stream as u32, (self.stream >> 32) as u32],
            self.key,
        );
        [(out[0] as u64) | ((out[1] as u64) << 32), (out[2] as u64) | ((out[3] as u64) << 32)]
    }

    /// Uniform in the open interval (0, 1).
    pub fn uniform(&self, counter: u64) -> f64 {
        open_unit(self.block(counter)[0])
    }

    /// Standard normal via the inverse CDF of [`Self::uniform`].
    pub fn normal(&self, counter: u64) -> f64 {
        inverse_normal_cdf(self.uniform(counter))
    }

    /// Sequential generator starting at counter 0.
    pub fn sequential(self) -> CounterRng {
        CounterRng { stream: self, counter: 0, spare: None }
    }
}

/// Sequential draws from a [`CounterStream`].
#[derive(Debug, Clone)]
pub struct CounterRng {
    stream: CounterStream,
    counter: u64,
    spare: Option<u64>,
}

impl CounterRng {
    pub fn new(seed: u64, stream: &Stream) -> Self {
        CounterStream::new(seed, stream).sequential()
    }

    pub fn next_u64(&mut self) -> u64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        let [a, b] = self.stream.block(self.counter);
        self.counter += 1;
        self.spare = Some(b);
        a
    }

    pub fn uniform(&mut self) -> f64 {
        open_unit(self.next_u64())
    }

    pub fn normal(&mut self) -> f64 {
        inverse_normal_cdf(self.uniform())
    }

    /// Uniform integer in `0..n` (Lemire's multiply-and-reject).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn sign(&mut self) -> i8 {
        if self.next_u64() >> 63 == 0 {
            1
        } else {
            -1
        }
    }
}

#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Inverse of the standard normal CDF for `p` in (0, 1), Wichura's AS241
/// (PPND16), relative accuracy about 1e-16.
#[allow(clippy::excessive_precision)]
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.3871328727963666080e0,
        1.3314166789178437745e+2,
        1.9715909503065514427e+3,
        1.3731693765509461125e+4,
        4.5921953931549871457e+4,
        6.7265770927008700853e+4,
        3.3430575583588128105e+4,
        2.5090809287301226727e+3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.2313330701600911252e+1,
        6.8718700749205790830e+2,
        5.3941960214247511077e+3,
        2.1213794301586595867e+4,
        3.9307895800092710610e+4,
        2.8729085735721942674e+4,
        5.2264952788528545610e+3,
    ];
    const C: [f64; 8] = [
        1.42343711074968357734e0,
        4.63033784615654529590e0,
        5.76949722146069140550e0,
        3.64784832476320460504e0,
        1.27045825245236838258e0,
        2.41780725177450611770e-1,
        2.27238449892691845833e-2,
        7.74545014278341407640e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.05319162663775882187e0,
        1.67638483018380384940e0,
        6.89767334985100004550e-1,
        1.48103976427480074590e-1,
        1.51986665636164571966e-2,
        5.47593808499534494600e-4,
        1.05075007164441684324e-9,
    ];
    const E: [f64; 8] = [
        6.65790464350110377720e0,
        5.46378491116411436990e0,
        1.78482653991729133580e0,
        2.96560571828504891230e-1,
        2.65321895265761230930e-2,
        1.24266094738807843860e-3,
        2.71155556874348757815e-5,
        2.01033439929228813265e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.99832206555887937690e-1,
        1.36929880922735805310e-1,
        1.48753612908506148525e-2,
        7.86869131145613259100e-4,
        1.84631831751005468180e-5,
        1.42151175831644588870e-7,
        2.04426310338993978564e-15,
    ];
    fn horner(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = libm::sqrt(-libm::log(tail));
    let value = if r <= 5.0 {
        let r = r - 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - 5.0;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}
