// The narrow slice of the DOM the components touch. Browsers pass real
// elements; tests pass an in-memory stand-in with the same shape.

export interface ElLike {
  className: string;
  textContent: string | null;
  // `any` keeps real HTMLElements (whose appendChild is generic over Node)
  // structurally compatible.
  appendChild(child: any): unknown;
  setAttribute(name: string, value: string): void;
  removeAttribute(name: string): void;
  addEventListener(type: string, handler: () => void): void;
  remove(): void;
}

export interface DocLike {
  createElement(tag: string): ElLike;
}

export function el(
  doc: DocLike,
  tag: string,
  className = '',
  text: string | null = null,
): ElLike {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== null) node.textContent = text;
  return node;
}
