import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

export function fixtureText(name: string): string {
  return readFileSync(join(fixturesDir, name), "utf-8");
}

export function fixture<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

/** The raw integer literal for a key, straight from the fixture bytes. */
export function rawLiteral(name: string, key: string): string {
  const match = fixtureText(name).match(new RegExp(`"${key}":\\s*(-?\\d+)`));
  if (!match) {
    throw new Error(`no integer literal for ${key} in ${name}`);
  }
  return match[1];
}

/** All raw integer literals for a repeated key, in file order. */
export function rawLiterals(name: string, key: string): string[] {
  return [...fixtureText(name).matchAll(new RegExp(`"${key}":\\s*(-?\\d+)`, "g"))].map((m) => m[1]);
}

/** Displayed money values: the verbatim text content of every .money span. */
export function displayedMoney(html: string): string[] {
  return [...html.matchAll(/<span class="money" data-money="(\d+)">([^<]*)<\/span>/g)].map((m) => {
    if (m[1] !== m[2]) {
      throw new Error(`money span attr/text mismatch: ${m[1]} vs ${m[2]}`);
    }
    return m[2];
  });
}
