use super::PerceptionError;

/// Binary segmentation mask at depth-image resolution, with the detector's
/// confidence score.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
    pub confidence: f64,
}

impl SegMask {
    pub fn empty(width: u32, height: u32, confidence: f64) -> Self {
        Self {
            width,
            height,
            bits: vec![false; (width * height) as usize],
            confidence,
        }
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> bool {
        self.bits[(v * self.width + u) as usize]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32) {
        self.bits[(v * self.width + u) as usize] = true;
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|b| *b)
    }
}

/// Outer boundary band of a mask: the mask dilated outward by `dilation`
/// pixels, minus the mask itself, clipped to the image. These pixels land on
/// the opaque frame around a glass pane, where depth is stable. A mask that
/// covers its whole neighborhood (e.g. the full image) falls back to its own
/// contour ring so the border is still reported.
pub fn extract_boundary(mask: &SegMask, dilation: u32) -> Result<Vec<(u32, u32)>, PerceptionError> {
    if !mask.any() {
        return Err(PerceptionError::EmptyMask);
    }
    let (w, h) = (mask.width as i64, mask.height as i64);
    let mut band = vec![false; (w * h) as usize];
    let mut current: Vec<(i64, i64)> = Vec::new();
    for v in 0..h {
        for u in 0..w {
            if mask.get(u as u32, v as u32) {
                current.push((u, v));
            }
        }
    }
    let mut occupied: Vec<bool> = mask.bits.clone();
    for _ in 0..dilation {
        let mut next: Vec<(i64, i64)> = Vec::new();
        for &(u, v) in &current {
            for dv in -1..=1i64 {
                for du in -1..=1i64 {
                    let (nu, nv) = (u + du, v + dv);
                    if nu < 0 || nv < 0 || nu >= w || nv >= h {
                        continue;
                    }
                    let idx = (nv * w + nu) as usize;
                    if !occupied[idx] {
                        occupied[idx] = true;
                        band[idx] = true;
                        next.push((nu, nv));
                    }
                }
            }
        }
        current = next;
    }

    let mut out: Vec<(u32, u32)> = Vec::new();
    for v in 0..h {
        for u in 0..w {
            if band[(v * w + u) as usize] {
                out.push((u as u32, v as u32));
            }
        }
    }
    if out.is_empty() {
        // Nothing outside the mask: report the mask's own contour.
        for v in 0..h {
            for u in 0..w {
                if !mask.get(u as u32, v as u32) {
                    continue;
                }
                let border = u == 0 || v == 0 || u == w - 1 || v == h - 1;
                let edge = border
                    || !(mask.get(u as u32 - 1, v as u32)
                        && mask.get(u as u32 + 1, v as u32)
                        && mask.get(u as u32, v as u32 - 1)
                        && mask.get(u as u32, v as u32 + 1));
                if edge {
                    out.push((u as u32, v as u32));
                }
            }
        }
    }
    Ok(out)
}
