//! Affine triangle geometry and Lagrange shape functions.
//!
//! Local P2 node order: the three vertices, then the midpoints of local
//! edges `(0,1)`, `(1,2)`, `(2,0)`, matching [`crate::mesh::Mesh::triangle_edges`].

/// Affine map data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub vertices: [[f64; 2]; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(vertices: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let inv = 1.0 / det;
        let grad_lambda = [
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ];
        Self {
            vertices,
            area: 0.5 * det,
            grad_lambda,
        }
    }

    /// Physical point at barycentric coordinates `l`.
    pub fn map(&self, l: [f64; 3]) -> [f64; 2] {
        let v = &self.vertices;
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    }

    /// Factor turning reference quadrature weights into physical ones.
    pub fn jacobian(&self) -> f64 {
        2.0 * self.area
    }
}

/// Local edge `k` joins local vertices `EDGE_VERTICES[k]`.
pub const EDGE_VERTICES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

pub fn p1_values(l: [f64; 3]) -> [f64; 3] {
    l
}

pub fn p1_gradients(g: &ElementGeometry) -> [[f64; 2]; 3] {
    g.grad_lambda
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

pub fn p2_gradients(g: &ElementGeometry, l: [f64; 3]) -> [[f64; 2]; 6] {
    let gl = &g.grad_lambda;
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        out[i] = [s * gl[i][0], s * gl[i][1]];
    }
    for (k, [i, j]) in EDGE_VERTICES.into_iter().enumerate() {
        out[3 + k] = [
            4.0 * (l[j] * gl[i][0] + l[i] * gl[j][0]),
            4.0 * (l[j] * gl[i][1] + l[i] * gl[j][1]),
        ];
    }
    out
}

/// Barycentric coordinates of the six P2 nodes.
pub const P2_NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];

/// Values and gradients of a quadratic vector field at one point, given its
/// twelve local coefficients (node-major, component-minor).
#[derive(Debug, Clone, Copy, Default)]
pub struct VectorPoint {
    pub value: [f64; 2],
    /// `grad[i][j] = d u_i / d x_j`
    pub grad: [[f64; 2]; 2],
}

impl VectorPoint {
    pub fn evaluate(coeffs: &[f64; 12], phi: &[f64; 6], dphi: &[[f64; 2]; 6]) -> Self {
        let mut p = Self::default();
        for a in 0..6 {
            for i in 0..2 {
                let c = coeffs[2 * a + i];
                p.value[i] += c * phi[a];
                p.grad[i][0] += c * dphi[a][0];
                p.grad[i][1] += c * dphi[a][1];
            }
        }
        p
    }

    pub fn divergence(&self) -> f64 {
        self.grad[0][0] + self.grad[1][1]
    }
}
