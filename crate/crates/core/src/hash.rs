//! Stable 64-bit FNV-1a hashing over canonical little-endian byte encodings.
//! Used to bind clouds and certificates to the exact instance that produced
//! them; must be identical across runs and platforms.

pub struct Hasher {
    state: u64,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

impl Hasher {
    pub fn new() -> Self {
        Hasher { state: FNV_OFFSET }
    }

    pub fn bytes(&mut self, data: &[u8]) -> &mut Self {
        for &b in data {
            self.state ^= b as u64;
            self.state = self.state.wrapping_mul(FNV_PRIME);
        }
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn usize(&mut self, v: usize) -> &mut Self {
        self.u64(v as u64)
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn f64s(&mut self, vs: &[f64]) -> &mut Self {
        for &v in vs {
            self.f64(v);
        }
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn finish(&self) -> u64 {
        self.state
    }

    pub fn finish_hex(&self) -> String {
        format!("{:016x}", self.state)
    }
}

impl Default for Hasher {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_order_sensitive() {
        let h1 = Hasher::new().f64s(&[1.0, 2.0]).finish();
        let h2 = Hasher::new().f64s(&[1.0, 2.0]).finish();
        let h3 = Hasher::new().f64s(&[2.0, 1.0]).finish();
        assert_eq!(h1, h2);
        assert_ne!(h1, h3);
    }
}
