//! Integer normal forms for lattices `L` with `diag(d) Z^r ⊆ L ⊆ Z^r`.

/// Upper-triangular Hermite basis of a full-rank lattice containing
/// `diag(d) Z^r`. Row `i` has its pivot in column `i`; entries above a pivot
/// are reduced into `[0, pivot)`, and entries to the right of a pivot in
/// column `j` are reduced modulo `d_j`, which keeps everything below `max d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct HermiteBasis {
    rows: Vec<Vec<i128>>,
}

impl HermiteBasis {
    pub(crate) fn diagonal(orders: &[u64]) -> Self {
        let r = orders.len();
        let rows = (0..r)
            .map(|i| {
                let mut row = vec![0i128; r];
                row[i] = orders[i] as i128;
                row
            })
            .collect();
        Self { rows }
    }

    pub(crate) fn rows(&self) -> &[Vec<i128>] {
        &self.rows
    }

    pub(crate) fn pivots(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.iter().enumerate().map(|(i, row)| row[i] as u64)
    }

    /// Adds `v` to the lattice. `orders` are the ambient cyclic orders.
    pub(crate) fn insert(&mut self, v: &[u64], orders: &[u64]) {
        let r = self.rows.len();
        let mut v: Vec<i128> = v.iter().zip(orders).map(|(&x, &d)| (x % d) as i128).collect();
        for col in 0..r {
            if v[col] == 0 {
                continue;
            }
            let row = &mut self.rows[col];
            let (g, s, t) = ext_gcd(row[col], v[col]);
            let (a, b) = (row[col] / g, v[col] / g);
            // [row; v] <- [s t; -b a] [row; v], unimodular since s a + t b = 1
            for c in col..r {
                let (x, y) = (row[c], v[c]);
                row[c] = s * x + t * y;
                v[c] = a * y - b * x;
            }
            for c in col + 1..r {
                let d = orders[c] as i128;
                row[c] = row[c].rem_euclid(d);
                v[c] = v[c].rem_euclid(d);
            }
            debug_assert_eq!(v[col], 0);
        }
        self.reduce();
    }

    /// Reduces entries above each pivot into `[0, pivot)`.
    fn reduce(&mut self) {
        let r = self.rows.len();
        for col in (0..r).rev() {
            let pivot = self.rows[col][col];
            debug_assert!(pivot > 0);
            for i in 0..col {
                let f = self.rows[i][col].div_euclid(pivot);
                if f != 0 {
                    let (upper, lower) = self.rows.split_at_mut(col);
                    for c in col..r {
                        upper[i][c] -= f * lower[0][c];
                    }
                }
            }
        }
    }

    /// Reduces `v` against the basis; the result is zero iff `v ∈ L`.
    pub(crate) fn remainder(&self, v: &[u64]) -> Vec<i128> {
        let r = self.rows.len();
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for col in 0..r {
            let pivot = self.rows[col][col];
            let f = w[col].div_euclid(pivot);
            if f != 0 {
                for c in col..r {
                    w[c] -= f * self.rows[col][c];
                }
            }
        }
        w
    }
}

/// `(g, s, t)` with `s a + t b = g = gcd(a, b) > 0`.
pub(crate) fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Smith form of a square nonsingular integer matrix `B` acting on row
/// vectors: returns the diagonal `s_1 | s_2 | ... | s_r` and a unimodular `V`
/// such that the row lattice of `B V` is `diag(s) Z^r`. A vector `v` then has
/// quotient coordinates `(v V)_i mod s_i`.
pub(crate) fn smith_form(b: &[Vec<i128>]) -> (Vec<i128>, Vec<Vec<i128>>) {
    let r = b.len();
    let mut a: Vec<Vec<i128>> = b.to_vec();
    let mut v: Vec<Vec<i128>> = (0..r).map(|i| (0..r).map(|j| i128::from(i == j)).collect()).collect();

    for t in 0..r {
        // bring the smallest nonzero entry of the trailing block to (t, t)
        while let Some((pi, pj)) = (t..r)
            .flat_map(|i| (t..r).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs())
        {
            a.swap(t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..r {
                let f = a[i][t].div_euclid(a[t][t]);
                if f != 0 {
                    for c in t..r {
                        a[i][c] -= f * a[t][c];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..r {
                let f = a[t][j].div_euclid(a[t][t]);
                if f != 0 {
                    for row in a.iter_mut() {
                        row[j] -= f * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= f * row[t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility: fold any entry not divisible by the pivot into row t
            let bad = (t + 1..r).find(|&i| (t + 1..r).any(|j| a[i][j] % a[t][t] != 0));
            match bad {
                Some(i) => {
                    for c in t..r {
                        a[t][c] += a[i][c];
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            for c in t..r {
                a[t][c] = -a[t][c];
            }
        }
    }
    ((0..r).map(|i| a[i][i]).collect(), v)
}

fn swap_cols(m: &mut [Vec<i128>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}
