/// Disjoint sets over `0..len` with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self { parent: (0..len as u32).collect(), size: vec![1; len] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    /// Dense labels `0..k` for the roots, in order of first appearance.
    pub fn labels(&mut self) -> (Vec<u32>, usize) {
        let mut map = vec![u32::MAX; self.parent.len()];
        let mut out = vec![0; self.parent.len()];
        let mut next = 0u32;
        for x in 0..self.parent.len() {
            let r = self.find(x);
            if map[r] == u32::MAX {
                map[r] = next;
                next += 1;
            }
            out[x] = map[r];
        }
        (out, next as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joins_and_labels() {
        let mut uf = UnionFind::new(6);
        assert!(uf.union(0, 3));
        assert!(uf.union(4, 3));
        assert!(!uf.union(0, 4));
        assert_eq!(uf.find(0), uf.find(4));
        let (labels, k) = uf.labels();
        assert_eq!(k, 4);
        assert_eq!(labels, vec![0, 1, 2, 0, 0, 3]);
    }
}
